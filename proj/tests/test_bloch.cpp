#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "qdf/bloch.hpp"

using namespace qdf;

namespace {

AcquisitionSchedule single_pulse_schedule(double flip, double te, double tr) {
    AcquisitionSchedule s;
    s.flip_deg = Eigen::VectorXd::Constant(1, flip);
    s.tr_ms = Eigen::VectorXd::Constant(1, tr);
    s.inversion_enabled = false;
    s.inversion_time_ms = 0.0;
    s.echo_time_ms = te;
    s.train_delay_ms = 0.0;
    return s;
}

} // namespace

TEST_CASE("ideal 90 degree pulse tips equilibrium onto +y") {
    SpinEnsemble e = single_spin_ensemble();
    SpinState st = SpinState::equilibrium(1);
    rf_rotate(st, 90.0, 0.0, e, 1.0);
    CHECK(st.Mx[0] == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(st.My[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(st.Mz[0] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("zero flip is the identity") {
    SpinEnsemble e = single_spin_ensemble();
    SpinState st = SpinState::equilibrium(1);
    st.Mx[0] = 0.3;
    st.My[0] = -0.2;
    st.Mz[0] = 0.5;
    SpinState before = st;
    rf_rotate(st, 0.0, 1.2, e, 1.0);
    CHECK(st.Mx[0] == before.Mx[0]);
    CHECK(st.My[0] == before.My[0]);
    CHECK(st.Mz[0] == before.Mz[0]);
}

TEST_CASE("ideal inversion flips Mz") {
    SpinEnsemble e = single_spin_ensemble();
    SpinState st = SpinState::equilibrium(1);
    rf_rotate(st, 180.0, 0.0, e, 1.0);
    CHECK(st.Mz[0] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(std::abs(st.Mx[0]) < 1e-15);
}

TEST_CASE("rotation preserves magnitude and matches the matrix oracle") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    SpinEnsemble e = single_spin_ensemble();
    for (int trial = 0; trial < 50; ++trial) {
        SpinState st = SpinState::equilibrium(1);
        st.Mx[0] = u(rng);
        st.My[0] = u(rng);
        st.Mz[0] = u(rng);
        double mag = std::sqrt(st.Mx[0] * st.Mx[0] + st.My[0] * st.My[0] + st.Mz[0] * st.Mz[0]);
        double flip = 180.0 * std::abs(u(rng));
        double phase = 3.0 * u(rng);
        Eigen::Vector3d m0(st.Mx[0], st.My[0], st.Mz[0]);
        rf_rotate(st, flip, phase, e, 1.0);
        Eigen::Vector3d want = test::rotation_matrix(flip * M_PI / 180.0, phase) * m0;
        CHECK(std::abs(st.Mx[0] - want.x()) < 1e-12);
        CHECK(std::abs(st.My[0] - want.y()) < 1e-12);
        CHECK(std::abs(st.Mz[0] - want.z()) < 1e-12);
        double mag2 = std::sqrt(st.Mx[0] * st.Mx[0] + st.My[0] * st.My[0] + st.Mz[0] * st.Mz[0]);
        CHECK(mag2 == doctest::Approx(mag).epsilon(1e-13));
    }
}

TEST_CASE("closed-form relaxation") {
    SpinState st = SpinState::equilibrium(1);
    st.Mz[0] = -1.0;
    relax(st, 800.0, 800.0, 100.0);
    CHECK(st.Mz[0] == doctest::Approx(1.0 - 2.0 * std::exp(-1.0)).epsilon(1e-14));

    SpinState id = SpinState::equilibrium(1);
    id.Mx[0] = 0.4;
    relax(id, 0.0, 800.0, 100.0);
    CHECK(id.Mx[0] == 0.4);

    SpinState tr = SpinState::equilibrium(1);
    tr.Mx[0] = 0.6;
    tr.My[0] = 0.8;
    relax(tr, 100.0, 800.0, 100.0);
    double mag = std::sqrt(tr.Mx[0] * tr.Mx[0] + tr.My[0] * tr.My[0]);
    CHECK(mag == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));

    CHECK_THROWS_AS(relax(tr, -1.0, 800.0, 100.0), InvalidParams);
}

TEST_CASE("spoiling over roots of unity cancels a coherent ensemble exactly") {
    SpinEnsemble e = make_ensemble(8);
    SpinState st = SpinState::equilibrium(8);
    st.Mx.setConstant(0.7);
    st.My.setConstant(0.1);
    spoil(st, e);
    auto sum = st.transverse_mean();
    CHECK(std::abs(sum) < 1e-15);
}

TEST_CASE("spoiling a single spin with zero dephase does nothing") {
    SpinEnsemble e = single_spin_ensemble();
    SpinState st = SpinState::equilibrium(1);
    st.Mx[0] = 0.5;
    st.My[0] = -0.25;
    spoil(st, e);
    CHECK(st.Mx[0] == 0.5);
    CHECK(st.My[0] == -0.25);
}

TEST_CASE("spoiling is a per-spin isometry") {
    SpinEnsemble e = make_ensemble(33);
    SpinState st = SpinState::equilibrium(33);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 33; ++i) {
        st.Mx[i] = u(rng);
        st.My[i] = u(rng);
    }
    Eigen::ArrayXd before = (st.Mx.square() + st.My.square()).sqrt();
    spoil(st, e);
    Eigen::ArrayXd after = (st.Mx.square() + st.My.square()).sqrt();
    CHECK((before - after).abs().maxCoeff() < 1e-14);
}

TEST_CASE("coherent limit: one ideal 90 with no relaxation gives |s| = 1") {
    auto sched = single_pulse_schedule(90.0, 1e-7, 1.0);
    TissueParams t{1e9, 1e9, 1.0};
    Eigen::VectorXcd s = simulate_signal(t, sched, single_spin_ensemble());
    CHECK(std::abs(s[0]) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("no excitation, no signal") {
    AcquisitionSchedule sched;
    sched.flip_deg = Eigen::VectorXd::Zero(12);
    sched.tr_ms = Eigen::VectorXd::Constant(12, 10.0);
    sched.inversion_enabled = false;
    Eigen::VectorXcd s = simulate_signal({800.0, 80.0, 1.0}, sched, make_ensemble(16));
    CHECK(s.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("inversion-recovery null at TI = T1 ln 2") {
    auto sched = single_pulse_schedule(90.0, 1e-6, 1.0);
    sched.inversion_enabled = true;
    sched.inversion_time_ms = 40.0;
    TissueParams t{40.0 / std::log(2.0), 40.0, 1.0};
    Eigen::VectorXcd s = simulate_signal(t, sched, single_spin_ensemble());
    CHECK(std::abs(s[0]) < 1e-10);
}

TEST_CASE("full train matches the matrix-exponential oracle to 1e-10") {
    AcquisitionSchedule sched = default_schedule(1000);
    SpinEnsemble e = make_ensemble(16);
    TissueParams t{800.0, 80.0, 1.05};
    Eigen::VectorXcd got = simulate_signal(t, sched, e);
    Eigen::VectorXcd want = test::simulate_signal_oracle(t, sched, e);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("oracle agreement with off-resonance and intra-voxel dephasing") {
    AcquisitionSchedule sched = default_schedule(120);
    SpinEnsemble e = make_ensemble(12);
    TissueParams t{900.0, 70.0, 0.9, 25.0, 40.0};
    Eigen::VectorXcd got = simulate_signal(t, sched, e);
    Eigen::VectorXcd want = test::simulate_signal_oracle(t, sched, e);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("simulation is deterministic") {
    AcquisitionSchedule sched = default_schedule(200);
    SpinEnsemble e = make_ensemble(32);
    TissueParams t{700.0, 60.0, 1.1};
    Eigen::VectorXcd a = simulate_signal(t, sched, e);
    Eigen::VectorXcd b = simulate_signal(t, sched, e);
    CHECK(a == b);
}

TEST_CASE("signal amplitude never exceeds 1") {
    AcquisitionSchedule sched = default_schedule(300);
    SpinEnsemble e = make_ensemble(24);
    for (double t2 : {20.0, 200.0, 1900.0}) {
        Eigen::VectorXcd s = simulate_signal({2000.0, t2, 1.3}, sched, e);
        CHECK(s.cwiseAbs().maxCoeff() <= 1.0 + 1e-12);
    }
}

TEST_CASE("T2 is not a dead parameter") {
    AcquisitionSchedule sched = default_schedule(200);
    SpinEnsemble e = make_ensemble(24);
    Eigen::VectorXcd a = simulate_signal({1000.0, 50.0, 1.0}, sched, e);
    Eigen::VectorXcd b = simulate_signal({1000.0, 500.0, 1.0}, sched, e);
    CHECK((a - b).norm() > 0.0);
}

TEST_CASE("per-spin magnitude stays below 1 through random physical event chains") {
    SpinEnsemble e = make_ensemble(16);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SpinState st = SpinState::equilibrium(16);
    for (int event = 0; event < 400; ++event) {
        switch (rng() % 3) {
        case 0:
            rf_rotate(st, 180.0 * u(rng), 2.0 * M_PI * u(rng), e, 0.5 + u(rng));
            break;
        case 1: {
            double t2 = 10.0 + 200.0 * u(rng);
            double t1 = t2 + 2000.0 * u(rng); // physical: T1 >= T2
            relax(st, 50.0 * u(rng), t1, t2);
            break;
        }
        default:
            spoil(st, e);
        }
        Eigen::ArrayXd mag = (st.Mx.square() + st.My.square() + st.Mz.square()).sqrt();
        CHECK(mag.maxCoeff() <= 1.0 + 1e-12);
    }
}

TEST_CASE("unphysical parameters are rejected unless explicitly allowed") {
    AcquisitionSchedule sched = default_schedule(10);
    SpinEnsemble e = make_ensemble(4);
    TissueParams bad{50.0, 500.0, 1.0};
    CHECK_THROWS_AS(simulate_signal(bad, sched, e), InvalidParams);
    SimOptions opts;
    opts.allow_unphysical = true;
    CHECK_NOTHROW(simulate_signal(bad, sched, e, opts));
    CHECK_THROWS_AS(simulate_signal({-1.0, 10.0, 1.0}, sched, e, opts), InvalidParams);
}

TEST_CASE("intra-voxel dephasing decays a free induction like exp(-t/T2')") {
    // one 90 pulse then silent readouts; no spoiling, no relaxation
    const int M = 6;
    AcquisitionSchedule sched;
    sched.flip_deg = Eigen::VectorXd::Zero(M);
    sched.flip_deg[0] = 90.0;
    sched.tr_ms = Eigen::VectorXd::Constant(M, 10.0);
    sched.echo_time_ms = 2.0;
    sched.inversion_enabled = false;
    SpinEnsemble e = make_ensemble(400);
    e.dephase_angles.setZero();
    e.flip_scale.setOnes();
    TissueParams t{1e9, 1e9, 1.0, 0.0, 60.0};
    Eigen::VectorXcd s = simulate_signal(t, sched, e);
    double time = sched.echo_time_ms;
    for (int m = 0; m < M; ++m) {
        CHECK(std::abs(s[m]) == doctest::Approx(std::exp(-time / 60.0)).epsilon(0.02));
        time += sched.tr_ms[m];
    }
}

TEST_CASE("schedule validation and CSV round trip") {
    AcquisitionSchedule sched = default_schedule(50);
    save_schedule_csv(sched, "sched_test.csv");
    AcquisitionSchedule back = load_schedule_csv("sched_test.csv");
    REQUIRE(back.length() == 50);
    // CSV keeps 10 significant digits
    CHECK((back.flip_deg - sched.flip_deg).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((back.tr_ms - sched.tr_ms).cwiseAbs().maxCoeff() < 1e-7);

    AcquisitionSchedule bad = sched;
    bad.flip_deg[3] = 200.0;
    CHECK_THROWS_AS(bad.validate(), InvalidParams);
    bad = sched;
    bad.tr_ms[0] = 1.0; // below TE
    CHECK_THROWS_AS(bad.validate(), InvalidParams);
}

TEST_CASE("slice profile is symmetric, full at center, weak beyond the slice") {
    CHECK(slice_profile(0.0) == doctest::Approx(1.0));
    CHECK(slice_profile(0.3) == doctest::Approx(slice_profile(-0.3)).epsilon(1e-12));
    CHECK(slice_profile(0.95) < 0.2);
    SpinEnsemble e = make_ensemble(64);
    CHECK(e.flip_scale.minCoeff() >= 0.0);
    CHECK(e.flip_scale.maxCoeff() <= 1.0);
}
