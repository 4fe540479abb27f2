#include "qdf/schedule.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qdf {

void AcquisitionSchedule::validate() const {
    if (length() < 1) throw InvalidParams("schedule needs at least one excitation");
    if (tr_ms.size() != flip_deg.size())
        throw InvalidParams("schedule: flip and TR trains differ in length");
    if (!(echo_time_ms > 0.0)) throw InvalidParams("schedule: echo time must be > 0");
    for (int m = 0; m < length(); ++m) {
        if (flip_deg[m] < 0.0 || flip_deg[m] > 180.0)
            throw InvalidParams("schedule: flip angle outside [0, 180] deg");
        if (!(tr_ms[m] > echo_time_ms))
            throw InvalidParams("schedule: every TR must exceed the echo time");
    }
    if (inversion_time_ms < 0.0 || train_delay_ms < 0.0)
        throw InvalidParams("schedule: negative delay");
}

AcquisitionSchedule default_schedule(int rows) {
    if (rows < 1) throw InvalidParams("schedule length must be >= 1");
    AcquisitionSchedule s;
    s.flip_deg.resize(rows);
    s.tr_ms.resize(rows);
    // Half-sine lobes of 125 excitations, peak amplitude cycling lobe by
    // lobe. Peaks in the 15-45 degree range: transverse coherence across
    // TRs is what encodes T2 in a spoiled train, and it scales with the
    // squared flip angle.
    const double peaks[] = {40.0, 20.0, 30.0, 15.0, 45.0, 25.0, 35.0, 26.0};
    const int lobe = 125;
    for (int i = 0; i < rows; ++i) {
        int l = i / lobe;
        double amp = peaks[l % 8];
        s.flip_deg[i] = amp * std::sin(M_PI * (i % lobe) / lobe);
        s.tr_ms[i] = 12.5 + 2.0 * std::sin(2.0 * M_PI * i / 367.0 + 0.7) +
                     0.5 * std::sin(2.0 * M_PI * i / 89.0);
    }
    s.inversion_time_ms = 40.0;
    s.echo_time_ms = 2.5;
    s.train_delay_ms = 5000.0;
    s.inversion_enabled = true;
    s.validate();
    return s;
}

void save_schedule_csv(const AcquisitionSchedule& s, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f << "flip_deg,tr_ms\n";
    char buf[64];
    for (int m = 0; m < s.length(); ++m) {
        std::snprintf(buf, sizeof buf, "%.10g,%.10g\n", s.flip_deg[m], s.tr_ms[m]);
        f << buf;
    }
    if (!f) throw IoError("write failed: " + path);
}

AcquisitionSchedule load_schedule_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    std::string line;
    if (!std::getline(f, line)) throw IoError("empty schedule file: " + path);
    // Strip trailing CR for files written on other platforms.
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "flip_deg,tr_ms")
        throw IoError("schedule file " + path + " missing 'flip_deg,tr_ms' header");
    std::vector<double> flips, trs;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        double a, b;
        char comma;
        if (!(ss >> a >> comma >> b) || comma != ',')
            throw IoError("bad schedule row: '" + line + "'");
        flips.push_back(a);
        trs.push_back(b);
    }
    AcquisitionSchedule s;
    s.flip_deg = Eigen::Map<Eigen::VectorXd>(flips.data(), flips.size());
    s.tr_ms = Eigen::Map<Eigen::VectorXd>(trs.data(), trs.size());
    s.validate();
    return s;
}

} // namespace qdf
