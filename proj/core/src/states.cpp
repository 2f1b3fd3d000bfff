#include "qoptic/states.hpp"

#include <cmath>

namespace qo {

namespace {

double finish(Vec& v, TruncationReport* rep, double full_weight) {
    double kept = v.squaredNorm();
    double discarded = std::max(0.0, full_weight - kept);
    if (rep) rep->discarded_weight = discarded / full_weight;
    v /= std::sqrt(kept);
    return discarded;
}

}  // namespace

StateVector coherent(cxd alpha, const FockSpace& space, TruncationReport* rep) {
    if (space.modes != 1) throw Error("coherent: single mode only (embed_tensor for more)");
    const int N = space.cutoff;
    if (std::norm(alpha) > N / 4.0 + 1e-12)
        throw Error("coherent: |alpha|^2 exceeds representability guard N/4");
    Vec v(space.dim());
    // ln-space recurrence avoids factorial overflow
    cxd c = std::exp(-0.5 * std::norm(alpha));
    v(0) = c;
    for (int n = 1; n <= N; ++n) {
        c *= alpha / std::sqrt(double(n));
        v(n) = c;
    }
    finish(v, rep, 1.0);
    return StateVector(space, std::move(v));
}

StateVector sms_vacuum(SqueezeParam zeta, const FockSpace& space, TruncationReport* rep) {
    if (space.modes != 1) throw Error("sms_vacuum: single mode only");
    const int N = space.cutoff;
    const double z = zeta.zeta;
    const double th = std::tanh(z);
    Vec v = Vec::Zero(space.dim());
    double c = 1.0 / std::sqrt(std::cosh(z));
    v(0) = c;
    for (int n = 1; 2 * n <= N; ++n) {
        // ratio of successive even-term amplitudes: -tanh(z) sqrt((2n)(2n-1))/(2n)
        c *= -th * std::sqrt(double(2 * n) * double(2 * n - 1)) / (2.0 * n);
        v(2 * n) = c;
    }
    finish(v, rep, 1.0);
    return StateVector(space, std::move(v));
}

StateVector tmsv(SqueezeParam zeta, const FockSpace& space, TruncationReport* rep) {
    if (space.modes != 2) throw Error("tmsv: requires a 2-mode space");
    const int N = space.cutoff;
    const double th = std::tanh(zeta.zeta);
    Vec v = Vec::Zero(space.dim());
    double c = 1.0 / std::cosh(zeta.zeta);
    for (int n = 0; n <= N; ++n) {
        v(space.index({n, n})) = c;
        c *= th;
    }
    finish(v, rep, 1.0);
    return StateVector(space, std::move(v));
}

double sms_variance(SqueezeParam zeta, double loss_R, double theta) {
    const double z = zeta.zeta;
    const double c = std::cos(theta), s = std::sin(theta);
    return (1.0 - loss_R) * (c * c * std::exp(-2 * z) + s * s * std::exp(2 * z)) / 2.0 +
           loss_R / 2.0;
}

double tms_variance(SqueezeParam zeta, const LossSpec& loss, double theta_sum) {
    const double z = zeta.zeta;
    const double t1 = loss.tau1, t2 = loss.tau2;
    return 0.5 + ((std::cosh(2 * z) - 1.0) * (t1 * t1 + t2 * t2) +
                  2.0 * t1 * t2 * std::cos(theta_sum) * std::sinh(2 * z)) /
                     4.0;
}

double squeezing_db(double v_min) {
    if (v_min <= 0) throw Error("squeezing_db: variance must be positive");
    return 10.0 * std::log10(0.5 / v_min);
}

ZetaLossEstimate infer_zeta_loss(double v_max, double v_min) {
    if (!(v_max > 0.5 && v_min < 0.5 && v_min > 0))
        throw Error("infer_zeta_loss: need v_max > 1/2 > v_min > 0");
    // joint solve of V_max/min = (e^{+-2z}(1-R) + R)/2
    const double R = (2.0 * v_max * v_min - 0.5) / (v_max + v_min - 1.0);
    if (R < 0 || R >= 1) throw Error("infer_zeta_loss: variances inconsistent with loss model");
    const double zeta = 0.25 * std::log((2.0 * v_max - R) / (2.0 * v_min - R));
    return {zeta, R};
}

}  // namespace qo
