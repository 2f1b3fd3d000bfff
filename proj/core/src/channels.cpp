#include "qoptic/channels.hpp"
#include "qoptic/homodyne.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace qo {

BeamsplitterSpec::BeamsplitterSpec(const Eigen::Matrix2cd& u) : matrix(u) {
    Eigen::Matrix2cd dev = u * u.adjoint() - Eigen::Matrix2cd::Identity();
    if (dev.cwiseAbs().maxCoeff() > 1e-12) throw Error("BeamsplitterSpec: matrix not unitary");
}

BeamsplitterSpec::BeamsplitterSpec(cxd mu, cxd lambda) {
    if (std::abs(std::norm(mu) + std::norm(lambda) - 1.0) > 1e-12)
        throw Error("BeamsplitterSpec: |mu|^2 + |lambda|^2 must equal 1");
    matrix << mu, lambda, -std::conj(lambda), std::conj(mu);
}

BeamsplitterSpec BeamsplitterSpec::identity() {
    return BeamsplitterSpec(Eigen::Matrix2cd::Identity());
}

BeamsplitterSpec BeamsplitterSpec::fifty_fifty() {
    Eigen::Matrix2cd u;
    u << 1, 1, -1, 1;
    return BeamsplitterSpec(u / std::sqrt(2.0));
}

BeamsplitterSpec BeamsplitterSpec::transmission(double t) {
    if (t < 0 || t > 1) throw Error("BeamsplitterSpec::transmission: t outside [0,1]");
    double r = std::sqrt(1.0 - t * t);
    Eigen::Matrix2cd u;
    u << t, r, -r, t;
    return BeamsplitterSpec(u);
}

Mat beamsplitter_unitary(const FockSpace& space, int mode_i, int mode_j,
                         const BeamsplitterSpec& spec) {
    if (mode_i == mode_j) throw Error("beamsplit: modes must differ");
    if (mode_i < 0 || mode_i >= space.modes || mode_j < 0 || mode_j >= space.modes)
        throw Error("beamsplit: mode out of range");
    // Hermitian generator from the matrix logarithm of the 2x2 unitary.
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(spec.matrix);
    Eigen::Vector2cd lam = es.eigenvalues();
    Eigen::Matrix2cd V = es.eigenvectors();
    Eigen::Matrix2cd H2 = Eigen::Matrix2cd::Zero();
    for (int k = 0; k < 2; ++k) {
        double phase = std::arg(lam(k));
        H2 += phase * V.col(k) * V.col(k).adjoint();
    }
    Mat ai = embed_mode_operator(space, mode_i, ladder_block(space.cutoff, LadderKind::Annihilate));
    Mat aj = embed_mode_operator(space, mode_j, ladder_block(space.cutoff, LadderKind::Annihilate));
    // U† a U = U2 a requires the generator sum_{pq} H2(p,q) a_p† a_q with U = e^{iH}
    Mat H = H2(0, 0) * (ai.adjoint() * ai) + H2(0, 1) * (ai.adjoint() * aj) +
            H2(1, 0) * (aj.adjoint() * ai) + H2(1, 1) * (aj.adjoint() * aj);
    Eigen::SelfAdjointEigenSolver<Mat> hes(H);
    Vec ph(hes.eigenvalues().size());
    for (Eigen::Index k = 0; k < ph.size(); ++k) ph(k) = std::exp(cxd(0.0, hes.eigenvalues()(k)));
    return hes.eigenvectors() * ph.asDiagonal() * hes.eigenvectors().adjoint();
}

StateVector beamsplit(const StateVector& psi, int mode_i, int mode_j,
                      const BeamsplitterSpec& spec) {
    Mat U = beamsplitter_unitary(psi.space, mode_i, mode_j, spec);
    return StateVector(psi.space, U * psi.amp, psi.conditional);
}

DensityOperator beamsplit(const DensityOperator& rho, int mode_i, int mode_j,
                          const BeamsplitterSpec& spec) {
    Mat U = beamsplitter_unitary(rho.space, mode_i, mode_j, spec);
    return DensityOperator(rho.space, U * rho.mat * U.adjoint(), rho.conditional);
}

namespace {

double log_binom(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

DensityOperator loss(const DensityOperator& rho, int mode, double eta) {
    if (eta < 0 || eta > 1) throw Error("loss: eta outside [0,1]");
    const int d = rho.space.levels();
    Mat out = Mat::Zero(rho.mat.rows(), rho.mat.cols());
    for (int k = 0; k < d; ++k) {
        Mat Kk = Mat::Zero(d, d);
        for (int n = k; n < d; ++n) {
            double le = log_binom(n, k) + (n - k) * std::log(std::max(eta, 1e-300)) +
                        k * std::log(std::max(1.0 - eta, 1e-300));
            if (eta == 0.0 && n != k) continue;
            if (eta == 1.0 && k != 0) continue;
            if (eta == 0.0) le = 0.0;                          // only n == k term survives
            if (eta == 1.0) le = 0.0;                          // only k == 0 term survives
            Kk(n - k, n) = std::exp(0.5 * le);
        }
        if (Kk.isZero(0)) continue;
        Mat K = embed_mode_operator(rho.space, mode, Kk);
        out += K * rho.mat * K.adjoint();
    }
    return DensityOperator(rho.space, std::move(out), rho.conditional);
}

DensityOperator loss(const StateVector& psi, int mode, double eta) {
    return loss(to_density(psi), mode, eta);
}

DensityOperator loss_by_dilation(const DensityOperator& rho, int mode, double eta) {
    FockSpace big(rho.space.modes + 1, rho.space.cutoff);
    const int d = rho.space.levels();
    Mat vac = Mat::Zero(d, d);
    vac(0, 0) = 1.0;
    DensityOperator ext = embed_tensor(
        {rho, DensityOperator(FockSpace(1, rho.space.cutoff), vac)});
    DensityOperator mixed =
        beamsplit(ext, mode, big.modes - 1, BeamsplitterSpec::transmission(std::sqrt(eta)));
    std::vector<int> keep(rho.space.modes);
    for (int m = 0; m < rho.space.modes; ++m) keep[m] = m;
    return partial_trace(mixed, keep);
}

std::pair<OperatorMatrix, OperatorMatrix> spcm_povm(const DetectorModel& det, int cutoff) {
    FockSpace sp(1, cutoff);
    const int d = cutoff + 1;
    Mat off = Mat::Zero(d, d), on = Mat::Zero(d, d);
    for (int n = 0; n < d; ++n) {
        double p_off = (1.0 - det.bg_ratio) * std::pow(1.0 - det.eta, n);
        off(n, n) = p_off;
        on(n, n) = 1.0 - p_off;
    }
    return {OperatorMatrix(sp, on, "SPCM on"), OperatorMatrix(sp, off, "SPCM off")};
}

namespace {

// Tap one mode into a fresh ancilla, apply a diagonal POVM to the ancilla and
// trace it out. Returns the (unnormalized) conditioned operator.
DensityOperator tap_and_condition(const DensityOperator& rho, int mode, double t_keep,
                                  const Eigen::VectorXd& povm_diag) {
    FockSpace big(rho.space.modes + 1, rho.space.cutoff);
    const int d = rho.space.levels();
    Mat vac = Mat::Zero(d, d);
    vac(0, 0) = 1.0;
    DensityOperator ext = embed_tensor({rho, DensityOperator(FockSpace(1, rho.space.cutoff), vac)});
    DensityOperator mixed =
        beamsplit(ext, mode, big.modes - 1, BeamsplitterSpec::transmission(t_keep));
    Mat Pi = Mat::Zero(d, d);
    for (int n = 0; n < d; ++n) Pi(n, n) = povm_diag(n);
    Mat cond = embed_mode_operator(big, big.modes - 1, Pi) * mixed.mat;
    DensityOperator weighted(big, std::move(cond), true);
    std::vector<int> keep(rho.space.modes);
    for (int m = 0; m < rho.space.modes; ++m) keep[m] = m;
    return partial_trace(weighted, keep);
}

}  // namespace

SubtractionResult subtract_photon(const DensityOperator& rho, int mode, double t_keep,
                                  const DetectorModel& det) {
    if (t_keep <= 0 || t_keep >= 1) throw Error("subtract_photon: t must lie in (0,1)");
    const int d = rho.space.levels();
    // true-click / no-click POVMs of the bare detector (background handled below)
    Eigen::VectorXd on(d), off(d);
    for (int n = 0; n < d; ++n) {
        off(n) = std::pow(1.0 - det.eta, n);
        on(n) = 1.0 - off(n);
    }
    DensityOperator rho_click = tap_and_condition(rho, mode, t_keep, on);
    DensityOperator rho_off = tap_and_condition(rho, mode, t_keep, off);
    double p_sub = rho_click.trace();
    double p_off = rho_off.trace();
    // background clicks: convex admixture of the no-subtraction branch with
    // weight bg_ratio relative to the true clicks
    double p_bg = det.bg_ratio * p_sub;
    DensityOperator click_out = rho_click;
    if (p_bg > 0 && p_off > 0) {
        click_out.mat += (p_bg / p_off) * rho_off.mat;
    }
    double p_click_total = p_sub + p_bg;

    Mat nmat = embed_mode_operator(rho.space, mode, ladder_block(rho.space.cutoff, LadderKind::Number));
    double nbar = (nmat * rho.mat).trace().real() / rho.mat.trace().real();

    SubtractionResult res;
    res.click = ConditionalOp{click_out, p_click_total, "click"};
    res.no_click = ConditionalOp{rho_off, p_off, "no-click"};
    res.validity_diagnostic = (1.0 - t_keep * t_keep) * nbar;
    return res;
}

SubtractionResult subtract_photon(const StateVector& psi, int mode, double t_keep,
                                  const DetectorModel& det) {
    return subtract_photon(to_density(psi), mode, t_keep, det);
}

StateVector subtract_photon_ideal(const StateVector& psi, int mode) {
    Mat a = embed_mode_operator(psi.space, mode, ladder_block(psi.space.cutoff, LadderKind::Annihilate));
    Vec v = a * psi.amp;
    double n = v.norm();
    if (n < 1e-300) throw Error("subtract_photon_ideal: annihilation gives the zero vector");
    return StateVector(psi.space, v / n);
}

DensityOperator subtract_photon_ideal(const DensityOperator& rho, int mode) {
    Mat a = embed_mode_operator(rho.space, mode, ladder_block(rho.space.cutoff, LadderKind::Annihilate));
    Mat m = a * rho.mat * a.adjoint();
    double tr = m.trace().real();
    if (tr < 1e-300) throw Error("subtract_photon_ideal: annihilation gives the zero operator");
    return DensityOperator(rho.space, m / tr);
}

double vampire_fidelity(int n_photons, double tap_power, double bg_ratio) {
    if (n_photons != 1 && n_photons != 2) throw Error("vampire_fidelity: n_photons must be 1 or 2");
    if (tap_power < 0 || tap_power >= 1) throw Error("vampire_fidelity: tap power outside [0,1)");
    const int N = n_photons + 2;
    FockSpace sp2(2, N);
    // delocalize |n> over Alice(0)/Bob(1)
    Vec v = Vec::Zero(sp2.dim());
    v(sp2.index({n_photons, 0})) = 1.0;
    StateVector deloc = beamsplit(StateVector(sp2, v), 0, 1, BeamsplitterSpec::fifty_fifty());

    DensityOperator cond(sp2, Mat::Zero(sp2.dim(), sp2.dim()), true);
    if (tap_power > 0) {
        double t_keep = std::sqrt(1.0 - tap_power);
        SubtractionResult sub =
            subtract_photon(deloc, 0, t_keep, DetectorModel(1.0, bg_ratio));
        cond = sub.click.output;
    } else {
        // weak-tap limit: exact subtraction mixed with the untouched state
        DensityOperator tru = to_density(subtract_photon_ideal(deloc, 0));
        cond.mat = tru.mat + bg_ratio * to_density(deloc).mat;
    }
    DensityOperator norm = cond.normalized();
    // recombine and compare the signal mode against |n-1>
    DensityOperator rec = beamsplit(norm, 0, 1, BeamsplitterSpec(Eigen::Matrix2cd(
                                        BeamsplitterSpec::fifty_fifty().matrix.adjoint())));
    DensityOperator sig = partial_trace(rec, {0});
    Vec ideal = Vec::Zero(sig.space.dim());
    ideal(n_photons - 1) = 1.0;
    return fidelity(sig, StateVector(sig.space, ideal));
}

DensityOperator naive_local_prediction(int n_photons) {
    if (n_photons < 0 || n_photons > 2) throw Error("naive_local_prediction: n must be 0, 1 or 2");
    const int N = std::max(n_photons, 1) + 1;
    FockSpace sp2(2, N);
    Vec v = Vec::Zero(sp2.dim());
    v(sp2.index({n_photons, 0})) = 1.0;
    StateVector deloc = beamsplit(StateVector(sp2, v), 0, 1, BeamsplitterSpec::fifty_fifty());
    // local realism: Alice's arm is emptied, Bob's half recombines with vacuum
    DensityOperator bob = partial_trace(to_density(deloc), {1});
    return loss(bob, 0, 0.5);
}

double no_signalling_mean(const DensityOperator& rho2, const DetectorModel& det) {
    if (rho2.space.modes != 2) throw Error("no_signalling_mean: requires a 2-mode state");
    auto [on, off] = spcm_povm(det, rho2.space.cutoff);
    Mat nB = embed_mode_operator(rho2.space, 1, ladder_block(rho2.space.cutoff, LadderKind::Number));
    double total = 0.0;
    for (const Mat* pi : {&on.mat, &off.mat}) {
        Mat Pi = embed_mode_operator(rho2.space, 0, *pi);
        total += (nB * Pi * rho2.mat).trace().real();
    }
    return total;
}

ConditionalOp catalysis(const DensityOperator& rho, int mode, const CatalysisSpec& spec,
                        const DetectorModel& det) {
    if (rho.space.cutoff < 2) throw Error("catalysis: cutoff too small to host the ancilla photon");
    FockSpace big(rho.space.modes + 1, rho.space.cutoff);
    const int d = rho.space.levels();
    Mat one = Mat::Zero(d, d);
    one(1, 1) = 1.0;
    DensityOperator ext = embed_tensor({rho, DensityOperator(FockSpace(1, rho.space.cutoff), one)});
    DensityOperator mixed =
        beamsplit(ext, mode, big.modes - 1, BeamsplitterSpec::transmission(spec.tau));
    auto [on, off] = spcm_povm(det, rho.space.cutoff);
    Mat Pi = embed_mode_operator(big, big.modes - 1, on.mat);
    DensityOperator weighted(big, Pi * mixed.mat, true);
    std::vector<int> keep(rho.space.modes);
    for (int m = 0; m < rho.space.modes; ++m) keep[m] = m;
    DensityOperator out = partial_trace(weighted, keep);
    double p = out.trace();
    return ConditionalOp{out, p, "catalysis click"};
}

ConditionalOp catalysis(const StateVector& psi, int mode, const CatalysisSpec& spec,
                        const DetectorModel& det) {
    return catalysis(to_density(psi), mode, spec, det);
}

DistillReport distill(const DistillConfig& cfg) {
    FockSpace sp2(2, cfg.cutoff);
    StateVector input = tmsv(SqueezeParam(cfg.zeta), sp2);
    DensityOperator rho_in = to_density(input);

    DensityOperator lossy = loss(rho_in, 0, cfg.channel.tau1 * cfg.channel.tau1);
    lossy = loss(lossy, 1, cfg.channel.tau2 * cfg.channel.tau2);

    ConditionalOp cat = catalysis(lossy, 1, CatalysisSpec::from_gain(cfg.gain), cfg.det);
    DensityOperator distilled = cat.normalized();

    auto detect = [&](const DensityOperator& r) {
        DensityOperator d1 = loss(r, 0, cfg.detection_efficiency);
        return loss(d1, 1, cfg.detection_efficiency);
    };
    DensityOperator init_det = detect(rho_in);
    DensityOperator lossy_det = detect(lossy);
    DensityOperator dist_det = detect(distilled);

    DistillReport rep;
    rep.initial = init_det;
    rep.degraded = lossy_det;
    rep.distilled = dist_det;
    rep.success_probability = cat.probability;
    rep.theta_sum.resize(cfg.phase_points);
    rep.variance_initial.resize(cfg.phase_points);
    rep.variance_degraded.resize(cfg.phase_points);
    rep.variance_distilled.resize(cfg.phase_points);
    double vmin_i = 1e300, vmin_d = 1e300;
    for (int k = 0; k < cfg.phase_points; ++k) {
        double th = 2.0 * M_PI * k / cfg.phase_points;
        rep.theta_sum[k] = th;
        rep.variance_initial[k] = two_mode_sum_variance(init_det, th / 2, th / 2);
        rep.variance_degraded[k] = two_mode_sum_variance(lossy_det, th / 2, th / 2);
        rep.variance_distilled[k] = two_mode_sum_variance(dist_det, th / 2, th / 2);
        vmin_i = std::min(vmin_i, rep.variance_initial[k]);
        vmin_d = std::min(vmin_d, rep.variance_distilled[k]);
    }
    rep.v_min_initial = vmin_i;
    rep.v_min_distilled = vmin_d;
    rep.logneg_initial = log_negativity(init_det);
    rep.logneg_degraded = log_negativity(lossy_det);
    rep.logneg_distilled = log_negativity(dist_det);
    rep.fidelity_raw = fidelity(dist_det, init_det);
    // catalysis rotates the distilled state's phase by pi/2 per mode relative
    // to the input EPR phase; both conventions are reported
    DensityOperator aligned = phase_rotate(dist_det, 1, M_PI);
    rep.fidelity_aligned = std::max(rep.fidelity_raw, fidelity(aligned, init_det));
    return rep;
}

double click_pattern_probability(int n_photons, int n_detectors, int n_clicks, double eta) {
    if (n_detectors == 1) {
        double p_off = std::pow(1.0 - eta, n_photons);
        if (n_clicks == 0) return p_off;
        if (n_clicks == 1) return 1.0 - p_off;
        return 0.0;
    }
    if (n_detectors != 2) throw Error("click_pattern_probability: 1 or 2 detectors");
    // each photon routes to either detector with probability 1/2, then fires
    // it with probability eta; inclusion-exclusion over silent detectors
    double p_both_silent = std::pow(1.0 - eta, n_photons);
    double p_A_silent = std::pow(1.0 - eta / 2.0, n_photons);
    double p0 = p_both_silent;
    double p2 = 1.0 - 2.0 * p_A_silent + p_both_silent;
    double p1 = 1.0 - p0 - p2;
    if (n_clicks == 0) return p0;
    if (n_clicks == 1) return p1;
    if (n_clicks == 2) return p2;
    return 0.0;
}

ConditionalOp herald_fock(double gamma, int n_detectors, int n_clicks, const DetectorModel& det,
                          int cutoff) {
    if (gamma <= 0 || gamma >= 0.5) throw Error("herald_fock: gamma must lie in (0, 0.5)");
    if (n_detectors != 1 && n_detectors != 2) throw Error("herald_fock: 1 or 2 detectors");
    FockSpace sp2(2, cutoff);
    // source sum_n gamma^n |nn>, normalized over the truncated basis
    Vec v = Vec::Zero(sp2.dim());
    double c = 1.0;
    for (int n = 0; n <= cutoff; ++n) {
        v(sp2.index({n, n})) = c;
        c *= gamma;
    }
    v /= v.norm();
    DensityOperator rho = to_density(StateVector(sp2, v));
    // click-pattern POVM on the trigger mode (mode 0)
    const int d = cutoff + 1;
    Mat Pi = Mat::Zero(d, d);
    for (int n = 0; n < d; ++n)
        Pi(n, n) = click_pattern_probability(n, n_detectors, n_clicks, det.eta);
    DensityOperator weighted(sp2, embed_mode_operator(sp2, 0, Pi) * rho.mat, true);
    DensityOperator signal = partial_trace(weighted, {1});
    return ConditionalOp{signal, signal.trace(), std::to_string(n_clicks) + "-click herald"};
}

RateReport rates(const RatesInput& in) {
    if (in.R1 <= 0 || in.eta <= 0 || in.nu <= 0) throw Error("rates: inputs must be positive");
    RateReport r;
    r.p1 = in.R1 / (in.eta * in.nu);
    r.p2_ratio = r.p1 * r.p1 * in.eta * in.eta / 2.0;
    r.R2 = r.p2_ratio * in.nu;
    if (in.zeta && in.T && in.g && in.eta_d) {
        double z = *in.zeta, T = *in.T, g = *in.g, ed = *in.eta_d;
        r.p2_dist = ed * (z * z / 2.0 * T * (1.0 - 1.0 / (g * g)) + 1.0 / (g * g));
        double p1 = in.p1.value_or(1e-3);
        r.R_dist = in.nu * p1 * r.p2_dist;
    }
    return r;
}

DensityOperator phase_rotate(const DensityOperator& rho, int mode, double phi) {
    const int d = rho.space.levels();
    Mat R = Mat::Zero(d, d);
    for (int n = 0; n < d; ++n) R(n, n) = std::exp(cxd(0.0, phi * n));
    Mat Rm = embed_mode_operator(rho.space, mode, R);
    return DensityOperator(rho.space, Rm * rho.mat * Rm.adjoint(), rho.conditional);
}

StateVector phase_rotate(const StateVector& psi, int mode, double phi) {
    const int d = psi.space.levels();
    Mat R = Mat::Zero(d, d);
    for (int n = 0; n < d; ++n) R(n, n) = std::exp(cxd(0.0, phi * n));
    return StateVector(psi.space, embed_mode_operator(psi.space, mode, R) * psi.amp,
                       psi.conditional);
}

}  // namespace qo
