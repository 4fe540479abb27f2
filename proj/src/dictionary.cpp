#include "qdf/dictionary.hpp"

#include <cstring>
#include <vector>

#include "qdf/parallel.hpp"

namespace qdf {

TissueParams tissue_from_axes(const ParameterGrid& grid, const Eigen::VectorXd& theta) {
    TissueParams t;
    bool t1 = false, t2 = false;
    for (int p = 0; p < grid.dims(); ++p) {
        const std::string& n = grid.axes[p].name;
        if (n == "T1") {
            t.T1_ms = theta[p];
            t1 = true;
        } else if (n == "T2") {
            t.T2_ms = theta[p];
            t2 = true;
        } else if (n == "B1") {
            t.B1_plus = theta[p];
        } else if (n == "dw0") {
            t.delta_omega0 = theta[p];
        } else if (n == "T2p") {
            t.T2_prime_ms = theta[p];
        } else {
            throw InvalidParams("unknown axis name '" + n + "' (want T1, T2, B1, dw0, T2p)");
        }
    }
    if (!t1 || !t2) throw InvalidParams("grid must include T1 and T2 axes");
    return t;
}

namespace {

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t n, std::uint64_t seed) {
    std::uint64_t h = 1469598103934665603ull ^ seed;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 1099511628211ull;
    }
    return h;
}

void append_f64(std::vector<std::uint8_t>& buf, double x) {
    std::uint8_t b[8];
    std::memcpy(b, &x, 8);
    buf.insert(buf.end(), b, b + 8);
}

} // namespace

std::array<std::uint8_t, 32> acquisition_fingerprint(const AcquisitionSchedule& schedule,
                                                     const SpinEnsemble& ensemble) {
    std::vector<std::uint8_t> buf;
    buf.reserve(16 * (schedule.length() + ensemble.spins()) + 64);
    for (int m = 0; m < schedule.length(); ++m) {
        append_f64(buf, schedule.flip_deg[m]);
        append_f64(buf, schedule.tr_ms[m]);
    }
    append_f64(buf, schedule.inversion_time_ms);
    append_f64(buf, schedule.echo_time_ms);
    append_f64(buf, schedule.train_delay_ms);
    append_f64(buf, schedule.inversion_enabled ? 1.0 : 0.0);
    for (int i = 0; i < ensemble.spins(); ++i) {
        append_f64(buf, ensemble.slice_offsets[i]);
        append_f64(buf, ensemble.flip_scale[i]);
        append_f64(buf, ensemble.dephase_angles[i]);
        append_f64(buf, ensemble.unit_freq[i]);
    }
    std::array<std::uint8_t, 32> out{};
    for (int k = 0; k < 4; ++k) {
        std::uint64_t h = fnv1a64(buf.data(), buf.size(), 0x9e3779b97f4a7c15ull * (k + 1));
        std::memcpy(out.data() + 8 * k, &h, 8);
    }
    return out;
}

Dictionary generate_dictionary(const ParameterGrid& grid, const AcquisitionSchedule& schedule,
                               const SpinEnsemble& ensemble, int threads) {
    schedule.validate();
    ensemble.validate();
    const std::int64_t n = grid.atom_count();
    const int M = schedule.length();

    Dictionary d;
    d.grid = grid;
    d.signal_length = M;
    d.compressed_length = 0;
    d.atoms.resize(n, M);
    d.norms.resize(n);
    d.fingerprint = acquisition_fingerprint(schedule, ensemble);

    SimOptions opts;
    opts.allow_unphysical = true;
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
        std::vector<int> k = d.grid.index_vector(static_cast<std::int64_t>(i));
        Eigen::VectorXd vk(d.grid.dims());
        for (int p = 0; p < d.grid.dims(); ++p) vk[p] = k[p];
        TissueParams t = tissue_from_axes(d.grid, d.grid.to_params(vk));
        Eigen::VectorXcd s = simulate_signal(t, schedule, ensemble, opts);
        d.atoms.row(static_cast<Eigen::Index>(i)) = s.transpose();
        d.norms[static_cast<Eigen::Index>(i)] = s.norm();
    });
    return d;
}

namespace {

// Basis from the time-domain Gram matrix G = A^H A. Eigenvectors of the
// Hermitian PSD Gram are the right singular vectors of A; sigma = sqrt(eig).
CompressionBasis basis_from_gram(const Eigen::MatrixXcd& gram, int L) {
    const int M = static_cast<int>(gram.rows());
    if (L < 1 || L > M) throw InvalidParams("compression rank L outside [1, M]");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);
    if (eig.info() != Eigen::Success) throw SingularSystem("eigendecomposition failed");

    // ascending from Eigen; flip to descending
    Eigen::VectorXd lam = eig.eigenvalues().reverse();
    Eigen::MatrixXcd vec = eig.eigenvectors().rowwise().reverse();

    double total = 0.0, kept = 0.0;
    for (int i = 0; i < M; ++i) total += std::max(lam[i], 0.0);

    CompressionBasis b;
    b.V = vec.leftCols(L);
    b.singular_values.resize(L);
    for (int i = 0; i < L; ++i) {
        double v = std::max(lam[i], 0.0);
        b.singular_values[i] = std::sqrt(v);
        kept += v;
    }
    b.energy_fraction = total > 0.0 ? kept / total : 1.0;
    b.rank_deficient = b.singular_values[L - 1] < 1e-12 * b.singular_values[0];
    return b;
}

} // namespace

std::pair<CompressionBasis, ComplexMatrixRM> svd_truncate(const Dictionary& dict, int L) {
    if (dict.compressed_length > 0) throw InvalidParams("dictionary is already compressed");
    if (L > dict.atom_rows() && L > dict.signal_length)
        throw InvalidParams("compression rank exceeds both matrix dimensions");
    // time-domain covariance sum_k s_k s_k^H (atoms are stored as rows)
    Eigen::MatrixXcd gram = (dict.atoms.adjoint() * dict.atoms).conjugate();
    CompressionBasis basis = basis_from_gram(gram, L);
    ComplexMatrixRM compressed = dict.atoms * basis.V.conjugate();
    return {std::move(basis), std::move(compressed)};
}

Dictionary compress_dictionary(const Dictionary& dict, int L) {
    auto [basis, compressed] = svd_truncate(dict, L);
    Dictionary out;
    out.grid = dict.grid;
    out.signal_length = dict.signal_length;
    out.compressed_length = L;
    out.atoms = std::move(compressed);
    out.norms = out.atoms.rowwise().norm();
    out.fingerprint = dict.fingerprint;
    out.basis = std::move(basis);
    return out;
}

Dictionary generate_compressed_dictionary(const ParameterGrid& grid,
                                          const AcquisitionSchedule& schedule,
                                          const SpinEnsemble& ensemble, int L, int threads) {
    schedule.validate();
    ensemble.validate();
    const std::int64_t n = grid.atom_count();
    const int M = schedule.length();
    if (L < 1 || L > M) throw InvalidParams("compression rank L outside [1, M]");

    SimOptions opts;
    opts.allow_unphysical = true;
    auto atom_at = [&](std::int64_t i) {
        std::vector<int> k = grid.index_vector(i);
        Eigen::VectorXd vk(grid.dims());
        for (int p = 0; p < grid.dims(); ++p) vk[p] = k[p];
        TissueParams t = tissue_from_axes(grid, grid.to_params(vk));
        return simulate_signal(t, schedule, ensemble, opts);
    };

    // Pass 1: Gram accumulation, one partial per worker, reduced in
    // worker order so a fixed thread count reproduces bit-identically.
    const int nt = resolve_threads(threads);
    std::vector<Eigen::MatrixXcd> partial(nt, Eigen::MatrixXcd::Zero(M, M));
    const std::int64_t chunk = (n + nt - 1) / nt;
    parallel_for(static_cast<std::size_t>(nt), threads, [&](std::size_t t) {
        const std::int64_t lo = static_cast<std::int64_t>(t) * chunk;
        const std::int64_t hi = std::min(lo + chunk, n);
        for (std::int64_t i = lo; i < hi; ++i) {
            Eigen::VectorXcd s = atom_at(i);
            partial[t].selfadjointView<Eigen::Lower>().rankUpdate(s);
        }
    });
    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(M, M);
    for (const auto& g : partial) gram += g;
    gram = gram.selfadjointView<Eigen::Lower>();

    CompressionBasis basis = basis_from_gram(gram, L);

    // Pass 2: regenerate and project.
    Dictionary d;
    d.grid = grid;
    d.signal_length = M;
    d.compressed_length = L;
    d.atoms.resize(n, L);
    d.norms.resize(n);
    d.fingerprint = acquisition_fingerprint(schedule, ensemble);
    const Eigen::MatrixXcd Vc = basis.V.conjugate();
    parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t i) {
        Eigen::VectorXcd s = atom_at(static_cast<std::int64_t>(i));
        d.atoms.row(static_cast<Eigen::Index>(i)) = (s.transpose() * Vc);
        d.norms[static_cast<Eigen::Index>(i)] = d.atoms.row(static_cast<Eigen::Index>(i)).norm();
    });
    d.basis = std::move(basis);
    return d;
}

Eigen::VectorXcd project_signal(const Eigen::VectorXcd& m, const CompressionBasis& basis) {
    if (m.size() != basis.V.rows())
        throw DimensionMismatch("signal length does not match basis time length");
    return basis.V.adjoint() * m;
}

} // namespace qdf
