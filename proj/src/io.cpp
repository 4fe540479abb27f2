#include "qdf/io.hpp"

#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

#include <zlib.h>

namespace qdf {

namespace {

constexpr std::uint32_t kDictVersion = 1;

class CrcWriter {
  public:
    explicit CrcWriter(const std::string& path) : f_(path, std::ios::binary), path_(path) {
        if (!f_) throw IoError("cannot open " + path + " for writing");
    }
    void bytes(const void* p, std::size_t n) {
        f_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
        crc_ = crc32(crc_, static_cast<const Bytef*>(p), static_cast<uInt>(n));
    }
    void u8(std::uint8_t v) { bytes(&v, 1); }
    void u16(std::uint16_t v) { bytes(&v, 2); }
    void u32(std::uint32_t v) { bytes(&v, 4); }
    void f32(float v) { bytes(&v, 4); }
    void f64(double v) { bytes(&v, 8); }
    void c32(std::complex<double> v) {
        f32(static_cast<float>(v.real()));
        f32(static_cast<float>(v.imag()));
    }
    void c64(std::complex<double> v) {
        f64(v.real());
        f64(v.imag());
    }
    void finish() {
        std::uint32_t crc = static_cast<std::uint32_t>(crc_);
        f_.write(reinterpret_cast<const char*>(&crc), 4);
        f_.flush();
        if (!f_) throw IoError("write failed: " + path_);
    }

  private:
    std::ofstream f_;
    std::string path_;
    uLong crc_ = crc32(0L, Z_NULL, 0);
};

class CrcReader {
  public:
    explicit CrcReader(const std::string& path) : f_(path, std::ios::binary), path_(path) {
        if (!f_) throw IoError("cannot open " + path);
    }
    void bytes(void* p, std::size_t n) {
        f_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(f_.gcount()) != n)
            throw TruncatedFile(path_ + ": unexpected end of file");
        crc_ = crc32(crc_, static_cast<const Bytef*>(p), static_cast<uInt>(n));
    }
    std::uint8_t u8() {
        std::uint8_t v;
        bytes(&v, 1);
        return v;
    }
    std::uint16_t u16() {
        std::uint16_t v;
        bytes(&v, 2);
        return v;
    }
    std::uint32_t u32() {
        std::uint32_t v;
        bytes(&v, 4);
        return v;
    }
    float f32() {
        float v;
        bytes(&v, 4);
        return v;
    }
    double f64() {
        double v;
        bytes(&v, 8);
        return v;
    }
    std::complex<double> c32() {
        float re = f32(), im = f32();
        return {re, im};
    }
    std::complex<double> c64() {
        double re = f64(), im = f64();
        return {re, im};
    }
    void expect_crc() {
        std::uint32_t want = static_cast<std::uint32_t>(crc_);
        std::uint32_t got;
        f_.read(reinterpret_cast<char*>(&got), 4);
        if (f_.gcount() != 4) throw TruncatedFile(path_ + ": missing checksum");
        if (got != want) throw ChecksumMismatch(path_ + ": checksum mismatch");
    }

  private:
    std::ifstream f_;
    std::string path_;
    uLong crc_ = crc32(0L, Z_NULL, 0);
};

void write_magic(CrcWriter& w, const char m[4]) { w.bytes(m, 4); }

void expect_magic(CrcReader& r, const char m[4], const std::string& what) {
    char got[4];
    r.bytes(got, 4);
    if (std::memcmp(got, m, 4) != 0) throw BadMagic("not a " + what + " file");
}

void write_axes(CrcWriter& w, const ParameterGrid& grid) {
    for (const auto& a : grid.axes) {
        if (a.name.size() > 255) throw IoError("axis name too long");
        w.u8(static_cast<std::uint8_t>(a.name.size()));
        w.bytes(a.name.data(), a.name.size());
        w.u8(static_cast<std::uint8_t>(a.spacing));
        w.f64(a.min);
        w.f64(a.max);
        w.u32(static_cast<std::uint32_t>(a.K));
    }
}

ParameterGrid read_axes(CrcReader& r, int P) {
    std::vector<ParameterAxis> axes;
    for (int p = 0; p < P; ++p) {
        int len = r.u8();
        std::string name(len, '\0');
        r.bytes(name.data(), len);
        auto spacing = static_cast<Spacing>(r.u8());
        double lo = r.f64();
        double hi = r.f64();
        int K = static_cast<int>(r.u32());
        axes.emplace_back(name, lo, hi, K, spacing);
    }
    return ParameterGrid(std::move(axes));
}

} // namespace

void save_dictionary(const Dictionary& dict, const std::string& path) {
    CrcWriter w(path);
    write_magic(w, "QDFD");
    w.u32(kDictVersion);
    w.u16(static_cast<std::uint16_t>(dict.grid.dims()));
    w.u32(static_cast<std::uint32_t>(dict.signal_length));
    w.u32(static_cast<std::uint32_t>(dict.compressed_length));
    write_axes(w, dict.grid);
    w.bytes(dict.fingerprint.data(), dict.fingerprint.size());
    for (Eigen::Index i = 0; i < dict.atoms.rows(); ++i)
        for (Eigen::Index j = 0; j < dict.atoms.cols(); ++j) w.c32(dict.atoms(i, j));
    for (Eigen::Index i = 0; i < dict.norms.size(); ++i)
        w.f32(static_cast<float>(dict.norms[i]));
    if (dict.compressed_length > 0) {
        if (!dict.basis) throw IoError("compressed dictionary lacks its basis");
        for (int i = 0; i < dict.basis->V.rows(); ++i)
            for (int j = 0; j < dict.basis->V.cols(); ++j) w.c32(dict.basis->V(i, j));
        for (int i = 0; i < dict.basis->singular_values.size(); ++i)
            w.f32(static_cast<float>(dict.basis->singular_values[i]));
    }
    w.finish();
}

Dictionary load_dictionary(const std::string& path) {
    CrcReader r(path);
    expect_magic(r, "QDFD", "dictionary");
    std::uint32_t version = r.u32();
    if (version != kDictVersion)
        throw VersionMismatch(path + ": unsupported dictionary version " + std::to_string(version));
    int P = r.u16();
    int M = static_cast<int>(r.u32());
    int L = static_cast<int>(r.u32());

    Dictionary d;
    d.grid = read_axes(r, P);
    d.signal_length = M;
    d.compressed_length = L;
    r.bytes(d.fingerprint.data(), d.fingerprint.size());

    const std::int64_t n = d.grid.atom_count();
    const int cols = L > 0 ? L : M;
    d.atoms.resize(n, cols);
    for (std::int64_t i = 0; i < n; ++i)
        for (int j = 0; j < cols; ++j) d.atoms(i, j) = r.c32();
    d.norms.resize(n);
    for (std::int64_t i = 0; i < n; ++i) d.norms[i] = r.f32();
    if (L > 0) {
        CompressionBasis b;
        b.V.resize(M, L);
        for (int i = 0; i < M; ++i)
            for (int j = 0; j < L; ++j) b.V(i, j) = r.c32();
        b.singular_values.resize(L);
        for (int j = 0; j < L; ++j) b.singular_values[j] = r.f32();
        // the discarded tail of the spectrum is not stored
        b.energy_fraction = std::numeric_limits<double>::quiet_NaN();
        b.rank_deficient = b.singular_values[L - 1] < 1e-12 * b.singular_values[0];
        d.basis = std::move(b);
    }
    r.expect_crc();
    return d;
}

void save_spline(const SplineModel& model, const std::string& path) {
    CrcWriter w(path);
    write_magic(w, "QDFC");
    w.u32(kDictVersion);
    w.u8(static_cast<std::uint8_t>(model.order));
    w.u16(static_cast<std::uint16_t>(model.grid.dims()));
    w.u32(static_cast<std::uint32_t>(model.channels));
    write_axes(w, model.grid);
    for (Eigen::Index i = 0; i < model.coefficients.rows(); ++i)
        for (Eigen::Index j = 0; j < model.coefficients.cols(); ++j)
            w.c64(model.coefficients(i, j));
    w.finish();
}

SplineModel load_spline(const std::string& path) {
    CrcReader r(path);
    expect_magic(r, "QDFC", "spline cache");
    std::uint32_t version = r.u32();
    if (version != kDictVersion)
        throw VersionMismatch(path + ": unsupported cache version " + std::to_string(version));
    SplineModel m;
    m.order = r.u8();
    int P = r.u16();
    m.channels = static_cast<int>(r.u32());
    m.grid = read_axes(r, P);
    m.extension = m.order >= 2 ? 1 : 0;
    std::int64_t rows = 1;
    for (int p = 0; p < P; ++p) rows *= m.grid.axes[p].K + 2 * m.extension;
    m.coefficients.resize(rows, m.channels);
    for (std::int64_t i = 0; i < rows; ++i)
        for (int j = 0; j < m.channels; ++j) m.coefficients(i, j) = r.c64();
    r.expect_crc();
    return m;
}

void save_signals(const SignalSet& set, const std::string& path) {
    CrcWriter w(path);
    write_magic(w, "QDFS");
    w.u32(static_cast<std::uint32_t>(set.length));
    w.u32(static_cast<std::uint32_t>(set.signals.rows()));
    for (Eigen::Index i = 0; i < set.signals.rows(); ++i)
        for (Eigen::Index j = 0; j < set.signals.cols(); ++j) w.c32(set.signals(i, j));
    w.finish();
}

SignalSet load_signals(const std::string& path) {
    CrcReader r(path);
    expect_magic(r, "QDFS", "signal set");
    SignalSet s;
    s.length = static_cast<int>(r.u32());
    std::int64_t count = r.u32();
    s.signals.resize(count, s.length);
    for (std::int64_t i = 0; i < count; ++i)
        for (int j = 0; j < s.length; ++j) s.signals(i, j) = r.c32();
    r.expect_crc();
    return s;
}

} // namespace qdf
