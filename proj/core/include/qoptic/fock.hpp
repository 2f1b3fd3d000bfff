#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qo {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Numeric failure (non-PSD state, non-monotone likelihood, ...). CLI maps this
/// to a distinct exit code.
struct NumericError : Error {
    using Error::Error;
};

// Truncated multimode Fock space: `modes` optical modes, each with photon
// numbers 0..cutoff. Basis enumeration is row-major with mode 0 as the
// slowest-varying index; this order is fixed for the process lifetime so
// serialized tensors stay portable.
struct FockSpace {
    int modes = 1;
    int cutoff = 1;

    FockSpace() = default;
    FockSpace(int m, int n) : modes(m), cutoff(n) {
        if (m < 1 || n < 1) throw Error("FockSpace: modes and cutoff must be >= 1");
    }

    Eigen::Index dim() const {
        Eigen::Index d = 1;
        for (int m = 0; m < modes; ++m) d *= cutoff + 1;
        return d;
    }
    int levels() const { return cutoff + 1; }

    Eigen::Index index(const std::vector<int>& ns) const {
        if ((int)ns.size() != modes) throw Error("FockSpace::index: wrong mode count");
        Eigen::Index i = 0;
        for (int n : ns) {
            if (n < 0 || n > cutoff) throw Error("FockSpace::index: photon number out of range");
            i = i * (cutoff + 1) + n;
        }
        return i;
    }
    std::vector<int> unindex(Eigen::Index i) const {
        std::vector<int> ns(modes);
        for (int m = modes - 1; m >= 0; --m) {
            ns[m] = int(i % (cutoff + 1));
            i /= (cutoff + 1);
        }
        return ns;
    }
    int total_photons(Eigen::Index i) const {
        int s = 0;
        for (int m = 0; m < modes; ++m) {
            s += int(i % (cutoff + 1));
            i /= (cutoff + 1);
        }
        return s;
    }
    bool operator==(const FockSpace& o) const { return modes == o.modes && cutoff == o.cutoff; }
    bool operator!=(const FockSpace& o) const { return !(*this == o); }
};

// A pure state. Squared norm is 1 for ordinary states; a conditional
// (post-selected) branch is flagged and carries its branch probability as the
// squared norm. Never normalized on read -- success probabilities stay
// auditable.
struct StateVector {
    FockSpace space;
    Vec amp;
    bool conditional = false;

    StateVector() = default;
    StateVector(FockSpace s, Vec a, bool cond = false)
        : space(s), amp(std::move(a)), conditional(cond) {
        if (amp.size() != space.dim()) throw Error("StateVector: amplitude size mismatch");
    }
    double norm2() const { return amp.squaredNorm(); }
    double probability() const { return conditional ? norm2() : 1.0; }
    StateVector normalized() const {
        StateVector s = *this;
        s.amp /= amp.norm();
        s.conditional = false;
        return s;
    }
};

struct DensityOperator {
    FockSpace space;
    Mat mat;
    bool conditional = false;

    DensityOperator() = default;
    DensityOperator(FockSpace s, Mat m, bool cond = false)
        : space(s), mat(std::move(m)), conditional(cond) {
        if (mat.rows() != space.dim() || mat.cols() != space.dim())
            throw Error("DensityOperator: matrix size mismatch");
    }
    double trace() const { return mat.trace().real(); }
    double probability() const { return conditional ? trace() : 1.0; }
    DensityOperator normalized() const {
        DensityOperator r = *this;
        r.mat /= trace();
        r.conditional = false;
        return r;
    }
};

struct OperatorMatrix {
    FockSpace space;
    Mat mat;
    std::string label;

    OperatorMatrix() = default;
    OperatorMatrix(FockSpace s, Mat m, std::string lbl = {})
        : space(s), mat(std::move(m)), label(std::move(lbl)) {
        if (mat.rows() != space.dim() || mat.cols() != space.dim())
            throw Error("OperatorMatrix: matrix size mismatch");
    }
};

enum class LadderKind { Annihilate, Create, Number };

/// Ladder matrix on one mode of `space`, identity elsewhere.
OperatorMatrix ladder(const FockSpace& space, int mode, LadderKind kind);

/// Single-mode ladder block (levels x levels).
Mat ladder_block(int cutoff, LadderKind kind);

/// Embed a single-mode operator into `space` at `mode` (identity on the rest).
Mat embed_mode_operator(const FockSpace& space, int mode, const Mat& op);

StateVector embed_tensor(const std::vector<StateVector>& parts);
DensityOperator embed_tensor(const std::vector<DensityOperator>& parts);
OperatorMatrix embed_tensor(const std::vector<OperatorMatrix>& parts);

DensityOperator to_density(const StateVector& psi);

/// Reduced operator on `keep` (ascending mode order); trace is preserved.
DensityOperator partial_trace(const DensityOperator& rho, const std::vector<int>& keep);

/// Transpose with respect to one mode of a 2-mode operator.
OperatorMatrix partial_transpose(const DensityOperator& rho, int mode);

enum class LogBase { E, Two };

/// Logarithmic negativity: log of the trace norm of the partial transpose.
/// Convention (calibrated against the attenuated-EPR anchors): base-2
/// logarithm, loss expressed as power transmission tau^2 per mode.
double log_negativity(const DensityOperator& rho, LogBase base = LogBase::Two);

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.
double fidelity(const DensityOperator& rho, const DensityOperator& sigma);
double fidelity(const StateVector& psi, const StateVector& phi);
double fidelity(const DensityOperator& rho, const StateVector& phi);

/// Hermitian matrix square root with eigenvalue clamping at -1e-9 -> 0
/// (MaxLik iterates drift slightly below PSD).
Mat sqrtm_psd(const Mat& m, double clamp = -1e-9);

/// Trace norm of a Hermitian matrix (sum of |eigenvalues|).
double trace_norm_hermitian(const Mat& m);

bool is_hermitian(const Mat& m, double tol = 1e-10);

}  // namespace qo
