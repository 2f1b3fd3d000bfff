#pragma once

#include "qoptic/fock.hpp"

namespace qo {

// Dimensionless squeezing parameter. Sign convention, fixed once and used
// everywhere: zeta > 0 means the X quadrature (theta = 0) carries the minimum
// variance e^{-2 zeta}/2 of a single-mode squeezed vacuum.
struct SqueezeParam {
    double zeta = 0.0;
    explicit SqueezeParam(double z) : zeta(z) {
        if (std::abs(z) > 2.0) throw Error("SqueezeParam: |zeta| > 2 exceeds truncation guard");
    }
};

// Amplitude transmissions of a two-arm loss channel; R is the power loss of a
// single arm (R + tau^2 = 1).
struct LossSpec {
    double tau1 = 1.0;
    double tau2 = 1.0;
    LossSpec() = default;
    LossSpec(double t1, double t2) : tau1(t1), tau2(t2) {
        if (t1 < 0 || t1 > 1 || t2 < 0 || t2 > 1) throw Error("LossSpec: tau outside [0,1]");
    }
    static LossSpec from_power(double T1, double T2) {
        return LossSpec(std::sqrt(T1), std::sqrt(T2));
    }
    double loss1() const { return 1.0 - tau1 * tau1; }
    double loss2() const { return 1.0 - tau2 * tau2; }
};

// Every constructor renormalizes after truncation and reports the discarded
// weight so the representability guard is auditable.
struct TruncationReport {
    double discarded_weight = 0.0;
};

/// Coherent state, amplitudes e^{-|a|^2/2} a^n / sqrt(n!). Guard: |a|^2 <= N/4.
StateVector coherent(cxd alpha, const FockSpace& space, TruncationReport* rep = nullptr);

/// Single-mode squeezed vacuum, weights (-tanh z)^n sqrt((2n)!)/(2^n n! sqrt(cosh z)).
StateVector sms_vacuum(SqueezeParam zeta, const FockSpace& space, TruncationReport* rep = nullptr);

/// Two-mode squeezed vacuum, sum_n tanh^n(z) |nn> / cosh z.
StateVector tmsv(SqueezeParam zeta, const FockSpace& space, TruncationReport* rep = nullptr);

/// Quadrature variance of an attenuated single-mode squeezed vacuum:
/// (1-R)(cos^2 t e^{-2z} + sin^2 t e^{2z})/2 + R/2.
double sms_variance(SqueezeParam zeta, double loss_R, double theta);

/// Sum-quadrature variance of a two-mode squeezed vacuum after per-mode
/// amplitude transmissions tau1, tau2; depends on theta1 + theta2 only.
double tms_variance(SqueezeParam zeta, const LossSpec& loss, double theta_sum);

/// Squeezing in decibels: 10 log10(0.5 / v_min).
double squeezing_db(double v_min);

struct ZetaLossEstimate {
    double zeta = 0.0;
    double loss_R = 0.0;  // power loss; efficiency is 1 - R
};

/// Invert the attenuated-squeezing variance extrema for (zeta, R). Consistent
/// with the forward law V = (e^{+-2z}(1-R) + R)/2; positive-zeta branch.
ZetaLossEstimate infer_zeta_loss(double v_max, double v_min);

}  // namespace qo
