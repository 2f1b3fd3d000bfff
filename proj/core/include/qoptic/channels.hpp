#pragma once

#include "qoptic/fock.hpp"
#include "qoptic/states.hpp"

#include <optional>
#include <utility>

namespace qo {

// Two-mode mixing, specified either by (mu, lambda) amplitude coefficients
// (|mu|^2 + |lambda|^2 = 1) or by an explicit 2x2 unitary acting on the
// annihilation operators, a_out = U a_in.
struct BeamsplitterSpec {
    Eigen::Matrix2cd matrix;

    explicit BeamsplitterSpec(const Eigen::Matrix2cd& u);
    BeamsplitterSpec(cxd mu, cxd lambda);

    static BeamsplitterSpec identity();
    static BeamsplitterSpec fifty_fifty();  // [[1,1],[-1,1]]/sqrt(2)
    /// Real mixer with amplitude transmission t on the diagonal.
    static BeamsplitterSpec transmission(double t_amplitude);
};

// Non-resolving click detector: quantum efficiency eta and background ratio
// p_bg/p_sub (share of clicks that are background).
struct DetectorModel {
    double eta = 1.0;
    double bg_ratio = 0.0;
    DetectorModel() = default;
    DetectorModel(double e, double bg) : eta(e), bg_ratio(bg) {
        if (e < 0 || e > 1) throw Error("DetectorModel: eta outside [0,1]");
        if (bg < 0 || bg >= 1) throw Error("DetectorModel: bg_ratio outside [0,1)");
    }
};

// Outcome-conditioned map result. `output` is subnormalized; its trace equals
// `probability`.
struct ConditionalOp {
    DensityOperator output;
    double probability = 0.0;
    std::string label;

    DensityOperator normalized() const { return output.normalized(); }
};

// Quantum catalysis beamsplitter: nominal gain g = 1/tau.
struct CatalysisSpec {
    double tau;
    explicit CatalysisSpec(double t) : tau(t) {
        if (t <= 0 || t >= 1) throw Error("CatalysisSpec: tau must lie in (0,1)");
    }
    static CatalysisSpec from_gain(double g) { return CatalysisSpec(1.0 / g); }
    double gain() const { return 1.0 / tau; }
};

/// Exact Fock-basis action of a two-mode mixer on modes (i, j); norm preserved.
/// Exact on the subspace with total photon number <= cutoff.
StateVector beamsplit(const StateVector& psi, int mode_i, int mode_j, const BeamsplitterSpec& spec);
DensityOperator beamsplit(const DensityOperator& rho, int mode_i, int mode_j,
                          const BeamsplitterSpec& spec);

/// The underlying Fock-space unitary (for cross-tests).
Mat beamsplitter_unitary(const FockSpace& space, int mode_i, int mode_j,
                         const BeamsplitterSpec& spec);

/// Photon loss with power transmission eta: exact binomial Kraus sum.
DensityOperator loss(const DensityOperator& rho, int mode, double eta);
DensityOperator loss(const StateVector& psi, int mode, double eta);

/// Loss realized by dilation (beamsplitter to a vacuum ancilla, then partial
/// trace); equality with the Kraus form is a required cross-test.
DensityOperator loss_by_dilation(const DensityOperator& rho, int mode, double eta);

/// Single-mode click/no-click POVM: <n|off|n> = (1 - bg)(1 - eta)^n, on = 1 - off.
std::pair<OperatorMatrix, OperatorMatrix> spcm_povm(const DetectorModel& det, int cutoff);

struct SubtractionResult {
    ConditionalOp click;          // conditioned on a click (true + background mixture)
    ConditionalOp no_click;
    double validity_diagnostic;   // first-order weight (1 - t^2) <n>
};

/// Exact tap-beamsplitter photon subtraction. `t_keep` is the amplitude
/// transmission of the surviving beam; power 1 - t_keep^2 is tapped to the
/// detector. Background clicks enter as a convex admixture of the no-click
/// branch with weight det.bg_ratio relative to the true-click branch.
SubtractionResult subtract_photon(const StateVector& psi, int mode, double t_keep,
                                  const DetectorModel& det);
SubtractionResult subtract_photon(const DensityOperator& rho, int mode, double t_keep,
                                  const DetectorModel& det);

/// Weak-tap limit of the subtraction: annihilation operator applied exactly,
/// output normalized.
StateVector subtract_photon_ideal(const StateVector& psi, int mode);
DensityOperator subtract_photon_ideal(const DensityOperator& rho, int mode);

/// Fidelity between the full conditioned model (delocalize -> tap -> click
/// mixture -> recombine) and the ideal nonlocal-subtraction prediction |n-1>.
/// `tap_power` is the power fraction diverted to the subtraction detector.
double vampire_fidelity(int n_photons, double tap_power, double bg_ratio);

/// Local-realism expectation: trace out the subtracted arm, recombine with
/// vacuum. n=1 -> diag(3/4, 1/4); n=2 -> diag(9/16, 3/8, 1/16).
DensityOperator naive_local_prediction(int n_photons);

/// Unconditioned Bob-mode mean photon number, summed over Alice's outcomes;
/// equals Tr[n_B rho] regardless of the detector.
double no_signalling_mean(const DensityOperator& rho2, const DetectorModel& det);

/// Quantum catalysis: inject an ancilla photon, mix with transmission tau,
/// herald on a click behind the ancilla port, trace the ancilla.
ConditionalOp catalysis(const DensityOperator& rho, int mode, const CatalysisSpec& spec,
                        const DetectorModel& det);
ConditionalOp catalysis(const StateVector& psi, int mode, const CatalysisSpec& spec,
                        const DetectorModel& det);

struct DistillConfig {
    double zeta = 0.16;
    LossSpec channel = LossSpec::from_power(1.0, 0.05);  // mode-2 attenuation
    double gain = 8.0;
    DetectorModel det = DetectorModel(1.0, 0.0);
    double detection_efficiency = 0.30;  // final loss on both modes before reporting
    int cutoff = 7;
    int phase_points = 48;
};

struct DistillReport {
    DensityOperator initial;    // lossless input after detection efficiency
    DensityOperator degraded;   // after the loss channel, after detection efficiency
    DensityOperator distilled;  // normalized conditioned output, after detection efficiency
    double success_probability = 0.0;
    std::vector<double> theta_sum;           // phase grid
    std::vector<double> variance_initial;    // sum-quadrature variance curves
    std::vector<double> variance_degraded;
    std::vector<double> variance_distilled;
    double v_min_initial = 0.0, v_min_distilled = 0.0;
    double logneg_initial = 0.0, logneg_degraded = 0.0, logneg_distilled = 0.0;  // base 2
    double fidelity_aligned = 0.0;  // fidelity(initial, distilled), phase-aligned
    double fidelity_raw = 0.0;      // same without the pi/2-per-mode alignment
};

/// EPR distillation pipeline: TMSV -> channel loss -> catalysis -> detection
/// efficiency; reports variances, negativities and fidelity to the input.
DistillReport distill(const DistillConfig& cfg);

/// Signal-mode state of sum_n gamma^n |nn> heralded by a click pattern on the
/// trigger mode split over `n_detectors` non-resolving detectors.
ConditionalOp herald_fock(double gamma, int n_detectors, int n_clicks, const DetectorModel& det,
                          int cutoff);

/// Click-pattern probabilities for an n-photon state split over two detectors.
double click_pattern_probability(int n_photons, int n_detectors, int n_clicks, double eta);

struct RatesInput {
    double R1 = 5e4;    // trigger rate, Hz
    double eta = 0.12;  // single-photon detection efficiency
    double nu = 76e6;   // laser repetition rate, Hz
    // distillation block (optional)
    std::optional<double> zeta;
    std::optional<double> T;      // loss-channel power transmission
    std::optional<double> g;      // catalysis gain
    std::optional<double> eta_d;  // catalysis trigger detection efficiency
    std::optional<double> p1;     // per-pulse ancilla preparation probability
};

struct RateReport {
    double p1 = 0.0;        // pair-birth probability per pulse, R1/(eta nu)
    double p2_ratio = 0.0;  // R2/nu = p1^2 eta^2 / 2
    double R2 = 0.0;        // two-photon event rate, Hz
    double p2_dist = 0.0;   // catalysis click probability per ancilla
    double R_dist = 0.0;    // distilled-state rate, Hz
};

RateReport rates(const RatesInput& in);

/// Phase-space rotation e^{i phi n} on one mode.
DensityOperator phase_rotate(const DensityOperator& rho, int mode, double phi);
StateVector phase_rotate(const StateVector& psi, int mode, double phi);

}  // namespace qo
