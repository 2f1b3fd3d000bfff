#include "qoptic/fock.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <unsupported/Eigen/KroneckerProduct>

namespace qo {

Mat ladder_block(int cutoff, LadderKind kind) {
    const int d = cutoff + 1;
    Mat a = Mat::Zero(d, d);
    for (int n = 1; n <= cutoff; ++n) a(n - 1, n) = std::sqrt(double(n));
    switch (kind) {
        case LadderKind::Annihilate: return a;
        case LadderKind::Create: return a.adjoint();
        case LadderKind::Number: return a.adjoint() * a;
    }
    throw Error("ladder_block: bad kind");
}

Mat embed_mode_operator(const FockSpace& space, int mode, const Mat& op) {
    if (mode < 0 || mode >= space.modes) throw Error("embed_mode_operator: mode out of range");
    const int d = space.levels();
    if (op.rows() != d || op.cols() != d) throw Error("embed_mode_operator: block size mismatch");
    Mat out = (mode == 0) ? op : Mat(Mat::Identity(d, d));
    Eigen::Index left = d;
    for (int m = 1; m < space.modes; ++m) {
        const Mat& blk = (m == mode) ? op : Mat(Mat::Identity(d, d));
        out = Eigen::kroneckerProduct(out, blk).eval();
        left *= d;
    }
    if (space.modes == 1) return op;
    return out;
}

OperatorMatrix ladder(const FockSpace& space, int mode, LadderKind kind) {
    if (mode < 0 || mode >= space.modes) throw Error("ladder: mode out of range");
    const char* names[] = {"a", "adag", "n"};
    Mat blk = ladder_block(space.cutoff, kind);
    return OperatorMatrix(space, embed_mode_operator(space, mode, blk),
                          std::string(names[int(kind)]) + "[" + std::to_string(mode) + "]");
}

namespace {

FockSpace joined_space(int total_modes, int cutoff) { return FockSpace(total_modes, cutoff); }

template <typename T>
void check_parts(const std::vector<T>& parts) {
    if (parts.empty()) throw Error("embed_tensor: no parts");
    for (const auto& p : parts)
        if (p.space.cutoff != parts.front().space.cutoff)
            throw Error("embed_tensor: cutoff mismatch between parts");
}

}  // namespace

StateVector embed_tensor(const std::vector<StateVector>& parts) {
    check_parts(parts);
    Vec v = parts.front().amp;
    int modes = parts.front().space.modes;
    bool cond = parts.front().conditional;
    for (size_t i = 1; i < parts.size(); ++i) {
        v = Eigen::kroneckerProduct(v, parts[i].amp).eval();
        modes += parts[i].space.modes;
        cond = cond || parts[i].conditional;
    }
    return StateVector(joined_space(modes, parts.front().space.cutoff), std::move(v), cond);
}

DensityOperator embed_tensor(const std::vector<DensityOperator>& parts) {
    check_parts(parts);
    Mat m = parts.front().mat;
    int modes = parts.front().space.modes;
    bool cond = parts.front().conditional;
    for (size_t i = 1; i < parts.size(); ++i) {
        m = Eigen::kroneckerProduct(m, parts[i].mat).eval();
        modes += parts[i].space.modes;
        cond = cond || parts[i].conditional;
    }
    return DensityOperator(joined_space(modes, parts.front().space.cutoff), std::move(m), cond);
}

OperatorMatrix embed_tensor(const std::vector<OperatorMatrix>& parts) {
    check_parts(parts);
    Mat m = parts.front().mat;
    int modes = parts.front().space.modes;
    std::string lbl = parts.front().label;
    for (size_t i = 1; i < parts.size(); ++i) {
        m = Eigen::kroneckerProduct(m, parts[i].mat).eval();
        modes += parts[i].space.modes;
        lbl += "⊗" + parts[i].label;
    }
    return OperatorMatrix(joined_space(modes, parts.front().space.cutoff), std::move(m), lbl);
}

DensityOperator to_density(const StateVector& psi) {
    return DensityOperator(psi.space, psi.amp * psi.amp.adjoint(), psi.conditional);
}

DensityOperator partial_trace(const DensityOperator& rho, const std::vector<int>& keep) {
    if (keep.empty()) throw Error("partial_trace: empty keep set");
    const int M = rho.space.modes;
    const int d = rho.space.levels();
    for (size_t i = 0; i < keep.size(); ++i) {
        if (keep[i] < 0 || keep[i] >= M) throw Error("partial_trace: mode out of range");
        if (i > 0 && keep[i] <= keep[i - 1]) throw Error("partial_trace: keep must be ascending");
    }
    std::vector<int> drop;
    for (int m = 0; m < M; ++m)
        if (std::find(keep.begin(), keep.end(), m) == keep.end()) drop.push_back(m);

    FockSpace out_space(int(keep.size()), rho.space.cutoff);
    const Eigen::Index dout = out_space.dim();
    Mat out = Mat::Zero(dout, dout);

    // strides in the full space
    std::vector<Eigen::Index> stride(M, 1);
    for (int m = M - 2; m >= 0; --m) stride[m] = stride[m + 1] * d;

    const Eigen::Index n_drop_states = Eigen::Index(std::pow(double(d), double(drop.size())));
    std::vector<int> dstate(drop.size(), 0);
    for (Eigen::Index t = 0; t < n_drop_states; ++t) {
        Eigen::Index base = 0;
        {
            Eigen::Index tt = t;
            for (int q = int(drop.size()) - 1; q >= 0; --q) {
                dstate[q] = int(tt % d);
                tt /= d;
            }
        }
        for (size_t q = 0; q < drop.size(); ++q) base += stride[drop[q]] * dstate[q];
        for (Eigen::Index r = 0; r < dout; ++r) {
            Eigen::Index rfull = base;
            {
                Eigen::Index rr = r;
                for (int q = int(keep.size()) - 1; q >= 0; --q) {
                    rfull += stride[keep[q]] * (rr % d);
                    rr /= d;
                }
            }
            for (Eigen::Index c = 0; c < dout; ++c) {
                Eigen::Index cfull = base;
                Eigen::Index cc = c;
                for (int q = int(keep.size()) - 1; q >= 0; --q) {
                    cfull += stride[keep[q]] * (cc % d);
                    cc /= d;
                }
                out(r, c) += rho.mat(rfull, cfull);
            }
        }
    }
    return DensityOperator(out_space, std::move(out), rho.conditional);
}

OperatorMatrix partial_transpose(const DensityOperator& rho, int mode) {
    if (rho.space.modes != 2) throw Error("partial_transpose: requires a 2-mode state");
    if (mode != 0 && mode != 1) throw Error("partial_transpose: mode out of range");
    const int d = rho.space.levels();
    Mat out(rho.mat.rows(), rho.mat.cols());
    for (int i0 = 0; i0 < d; ++i0)
        for (int i1 = 0; i1 < d; ++i1)
            for (int j0 = 0; j0 < d; ++j0)
                for (int j1 = 0; j1 < d; ++j1) {
                    Eigen::Index r = Eigen::Index(i0) * d + i1, c = Eigen::Index(j0) * d + j1;
                    Eigen::Index rt, ct;
                    if (mode == 0) {
                        rt = Eigen::Index(j0) * d + i1;
                        ct = Eigen::Index(i0) * d + j1;
                    } else {
                        rt = Eigen::Index(i0) * d + j1;
                        ct = Eigen::Index(j0) * d + i1;
                    }
                    out(rt, ct) = rho.mat(r, c);
                }
    return OperatorMatrix(rho.space, std::move(out), "PT");
}

double trace_norm_hermitian(const Mat& m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

double log_negativity(const DensityOperator& rho, LogBase base) {
    if (std::abs(rho.trace() - 1.0) > 1e-6)
        throw Error("log_negativity: input must have trace 1");
    OperatorMatrix pt = partial_transpose(rho, 1);
    double tn = trace_norm_hermitian(pt.mat);
    double ln = std::log(tn);
    return base == LogBase::Two ? ln / std::log(2.0) : ln;
}

Mat sqrtm_psd(const Mat& m, double clamp) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.adjoint()));
    Eigen::VectorXd w = es.eigenvalues();
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w(i) < clamp) throw NumericError("sqrtm_psd: eigenvalue below clamp threshold");
        w(i) = w(i) > 0 ? std::sqrt(w(i)) : 0.0;
    }
    return es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
}

bool is_hermitian(const Mat& m, double tol) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

double fidelity(const DensityOperator& rho, const DensityOperator& sigma) {
    if (rho.space != sigma.space) throw Error("fidelity: dimension mismatch");
    Mat sr = sqrtm_psd(rho.mat);
    Mat inner = sqrtm_psd(sr * sigma.mat * sr);
    double f = inner.trace().real();
    return f * f;
}

double fidelity(const StateVector& psi, const StateVector& phi) {
    if (psi.space != phi.space) throw Error("fidelity: dimension mismatch");
    return std::norm(psi.amp.dot(phi.amp));
}

double fidelity(const DensityOperator& rho, const StateVector& phi) {
    if (rho.space != phi.space) throw Error("fidelity: dimension mismatch");
    return (phi.amp.adjoint() * rho.mat * phi.amp)(0, 0).real();
}

}  // namespace qo
