#include "qoptic/homodyne.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace qo {

double quad_wavefunction(int n, double x) {
    return quad_wavefunctions(n, x)(n);
}

Eigen::VectorXd quad_wavefunctions(int nmax, double x) {
    Eigen::VectorXd out(nmax + 1);
    out(0) = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
    if (nmax >= 1) out(1) = std::sqrt(2.0) * x * out(0);
    for (int n = 2; n <= nmax; ++n)
        out(n) = std::sqrt(2.0 / n) * x * out(n - 1) - std::sqrt(double(n - 1) / n) * out(n - 2);
    return out;
}

OperatorMatrix projector(double value, double phase, const FockSpace& space) {
    if (space.modes != 1) throw Error("projector: single mode (use embed_tensor for more)");
    Eigen::VectorXd psi = quad_wavefunctions(space.cutoff, value);
    Vec v(space.dim());
    for (int n = 0; n <= space.cutoff; ++n) v(n) = psi(n) * std::exp(cxd(0.0, n * phase));
    return OperatorMatrix(space, v * v.adjoint(), "projector");
}

Mat quadrature_operator(const FockSpace& space, int mode, double theta) {
    Mat a = ladder_block(space.cutoff, LadderKind::Annihilate);
    Mat q = (a * std::exp(cxd(0.0, -theta)) + a.adjoint() * std::exp(cxd(0.0, theta))) /
            std::sqrt(2.0);
    return embed_mode_operator(space, mode, q);
}

double two_mode_sum_variance(const DensityOperator& rho, double theta1, double theta2) {
    if (rho.space.modes != 2) throw Error("two_mode_sum_variance: requires a 2-mode state");
    Mat Q = (quadrature_operator(rho.space, 0, theta1) + quadrature_operator(rho.space, 1, theta2)) /
            std::sqrt(2.0);
    double tr = rho.mat.trace().real();
    double m = (Q * rho.mat).trace().real() / tr;
    double m2 = (Q * Q * rho.mat).trace().real() / tr;
    return m2 - m * m;
}

namespace {

struct EigenModes {
    std::vector<double> weight;
    std::vector<Mat> coeff;  // per eigenvector: (levels x levels) coefficient matrix (2-mode)
    std::vector<Vec> vec;    // 1-mode eigenvectors
};

EigenModes decompose(const DensityOperator& rho, double tol = 1e-12) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho.mat + rho.mat.adjoint()));
    EigenModes em;
    const double wmax = es.eigenvalues().maxCoeff();
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        double w = es.eigenvalues()(k);
        if (w < tol * wmax) continue;
        em.weight.push_back(w);
        if (rho.space.modes == 2) {
            const int d = rho.space.levels();
            Mat C(d, d);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) C(i, j) = es.eigenvectors()(Eigen::Index(i) * d + j, k);
            em.coeff.push_back(std::move(C));
        } else {
            em.vec.push_back(es.eigenvectors().col(k));
        }
    }
    return em;
}

Eigen::MatrixXcd psi_table(int cutoff, const QuadratureGrid& grid, double theta) {
    const Eigen::Index G = grid.size();
    Eigen::MatrixXcd T(cutoff + 1, G);
    for (Eigen::Index g = 0; g < G; ++g) {
        Eigen::VectorXd psi = quad_wavefunctions(cutoff, grid.point(g));
        for (int n = 0; n <= cutoff; ++n) T(n, g) = psi(n) * std::exp(cxd(0.0, -n * theta));
    }
    return T;
}

}  // namespace

Eigen::VectorXd pdf(const DensityOperator& rho, const std::vector<double>& phases,
                    const QuadratureGrid& grid) {
    if ((int)phases.size() != rho.space.modes) throw Error("pdf: phase count must match modes");
    if (rho.space.modes > 2) throw Error("pdf: at most 2 modes supported");
    const double tr = rho.mat.trace().real();
    if (std::abs(tr - 1.0) > 1e-9) throw Error("pdf: state must be normalized");
    EigenModes em = decompose(rho);
    const Eigen::Index G = grid.size();
    if (rho.space.modes == 1) {
        Eigen::MatrixXcd T = psi_table(rho.space.cutoff, grid, phases[0]);
        Eigen::VectorXd out = Eigen::VectorXd::Zero(G);
        for (size_t k = 0; k < em.weight.size(); ++k) {
            Eigen::VectorXcd amp = T.transpose() * em.vec[k];
            out += em.weight[k] * amp.cwiseAbs2();
        }
        double mass = out.sum() * grid.step;
        if (std::abs(mass - 1.0) > 1e-4)
            throw Error("pdf: grid too coarse or narrow (mass " + std::to_string(mass) + ")");
        return out;
    }
    // 2 modes: row-major (x1, x2) table
    Eigen::MatrixXcd T1 = psi_table(rho.space.cutoff, grid, phases[0]);
    Eigen::MatrixXcd T2 = psi_table(rho.space.cutoff, grid, phases[1]);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(G * G);
    for (size_t k = 0; k < em.weight.size(); ++k) {
        Eigen::MatrixXcd A = T1.transpose() * em.coeff[k] * T2;  // (G x G)
        out += em.weight[k] *
               Eigen::Map<const Eigen::ArrayXcd>(A.data(), G * G).abs2().matrix();
        // note: Eigen is column-major; A.data() runs over x1 fastest within a
        // column of fixed x2. Record the layout and keep it consistent below.
    }
    double mass = out.sum() * grid.step * grid.step;
    if (std::abs(mass - 1.0) > 1e-4)
        throw Error("pdf: grid too coarse or narrow (mass " + std::to_string(mass) + ")");
    return out;
}

Eigen::VectorXd pdf(const StateVector& psi, const std::vector<double>& phases,
                    const QuadratureGrid& grid) {
    return pdf(to_density(psi), phases, grid);
}

namespace {

// inverse-CDF draw with linear interpolation inside bins
double draw_from(const Eigen::VectorXd& density, const QuadratureGrid& grid, double u) {
    Eigen::VectorXd cdf(density.size());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < density.size(); ++i) {
        acc += density(i);
        cdf(i) = acc;
    }
    double target = u * acc;
    Eigen::Index lo = 0, hi = density.size() - 1;
    while (lo < hi) {
        Eigen::Index mid = (lo + hi) / 2;
        if (cdf(mid) < target)
            lo = mid + 1;
        else
            hi = mid;
    }
    double prev = lo > 0 ? cdf(lo - 1) : 0.0;
    double frac = (target - prev) / std::max(cdf(lo) - prev, 1e-300);
    return grid.point(lo) + (frac - 0.5) * grid.step;
}

}  // namespace

std::vector<QuadratureRecord> sample(const DensityOperator& rho, const std::vector<double>& phases,
                                     int count, std::uint64_t seed, const QuadratureGrid* gridp) {
    if (count < 1) throw Error("sample: count must be >= 1");
    QuadratureGrid grid = gridp ? *gridp : QuadratureGrid::for_cutoff(rho.space.cutoff);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<QuadratureRecord> out;
    out.reserve(count);
    const Eigen::Index G = grid.size();
    if (rho.space.modes == 1) {
        Eigen::VectorXd den = pdf(rho, phases, grid);
        for (int i = 0; i < count; ++i) {
            QuadratureRecord r;
            r.values = {draw_from(den, grid, uni(rng))};
            r.phases = phases;
            out.push_back(std::move(r));
        }
        return out;
    }
    if (rho.space.modes != 2) throw Error("sample: at most 2 modes supported");
    Eigen::VectorXd joint = pdf(rho, phases, grid);  // column-major: index = x2*G + x1
    Eigen::Map<const Eigen::MatrixXd> J(joint.data(), G, G);  // (x1, x2)
    Eigen::VectorXd marg1 = J.rowwise().sum();
    for (int i = 0; i < count; ++i) {
        double u1 = uni(rng);
        // draw x1 from the marginal, then x2 from the conditional row
        Eigen::VectorXd m = marg1;
        double x1 = draw_from(m, grid, u1);
        Eigen::Index i1 = std::clamp<Eigen::Index>(Eigen::Index((x1 - grid.lo) / grid.step + 0.5),
                                                   0, G - 1);
        Eigen::VectorXd cond = J.row(i1).transpose();
        double x2 = draw_from(cond, grid, uni(rng));
        QuadratureRecord r;
        r.values = {x1, x2};
        r.phases = phases;
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<QuadratureRecord> sample(const StateVector& psi, const std::vector<double>& phases,
                                     int count, std::uint64_t seed, const QuadratureGrid* gridp) {
    return sample(to_density(psi), phases, count, seed, gridp);
}

double mode_overlap(const std::vector<double>& grid, const std::vector<cxd>& phi1,
                    const std::vector<cxd>& phi2) {
    if (grid.size() != phi1.size() || grid.size() != phi2.size())
        throw Error("mode_overlap: grid mismatch");
    auto trapz = [&](auto f) {
        cxd acc = 0.0;
        for (size_t i = 1; i < grid.size(); ++i)
            acc += 0.5 * (grid[i] - grid[i - 1]) * (f(i) + f(i - 1));
        return acc;
    };
    cxd inner = trapz([&](size_t i) { return std::conj(phi1[i]) * phi2[i]; });
    double n1 = trapz([&](size_t i) { return cxd(std::norm(phi1[i]), 0); }).real();
    double n2 = trapz([&](size_t i) { return cxd(std::norm(phi2[i]), 0); }).real();
    return std::norm(inner) / (n1 * n2);
}

double spectral_visibility(double delta, double m) {
    if (m < 1) throw Error("spectral_visibility: m must be >= 1");
    double x = delta * m * std::numbers::pi;
    if (std::abs(x) < 1e-12) return 1.0;
    return std::abs(std::sin(x) / x);
}

}  // namespace qo
