#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rarinf/designs.hpp"
#include "rarinf/error.hpp"
#include "rarinf/exact_engine.hpp"
#include "rarinf/types.hpp"

namespace rarinf {

// Unconditional MLE (s1/n1, s2/n2).
// Throws DegenerateArm if an arm is empty, BoundaryEstimate if either
// coordinate is 0 or 1 (such outcomes are excluded from analysis).
ProbPair umle(const Outcome& o);

// diag(n1 / (p1 (1 - p1)), n2 / (p2 (1 - p2))).
InfoMatrix lambda_matrix(const ProbPair& p, int n1, int n2);

// d/dp_k of the k-th diagonal entry of lambda_matrix: -n_k (1 - 2 p_k) / (p_k (1 - p_k))^2.
Vec2 lambda_derivative(const ProbPair& p, int n1, int n2);

// Observed Fisher information of the joint likelihood at the UMLE. Equal to
// Lambda_n evaluated at p-hat, and to the per-subject conditional total M.
InfoMatrix unconditional_observed_info(const Outcome& o);

// E[Lambda_N] over 1 <= N1 <= n-1, renormalized over that range (Lambda is
// undefined when an arm is empty). Throws AllMassDegenerate when the range
// carries no mass.
InfoMatrix unconditional_expected_info(const DesignLaw& law, const ProbPair& p);
InfoMatrix unconditional_expected_info(const DesignSpec& design, const ProbPair& p);

// Lambda_n Var[p-hat | N1 = n1] Lambda_n, both at p.
InfoMatrix conditional_expected_info(const DesignLaw& law, const ProbPair& p, int n1);
InfoMatrix conditional_expected_info(const DesignSpec& design, const ProbPair& p, int n1);

// Negative Hessian of log L_c at p-hat. Avoids differentiation:
//   J = Lambda Var[p-hat|N] Lambda + diag(b_k * dLambda_kk/dp_k),
// with b = E[p-hat|N] - p and everything evaluated at p-hat.
InfoMatrix conditional_observed_info(const DesignLaw& law, const Outcome& o);
InfoMatrix conditional_observed_info(const DesignSpec& design, const Outcome& o);

// Var[Z | N1 = n1] = Lambda^{1/2} Var[p-hat|N] Lambda^{1/2}. Loewner order
// above the identity means conditioning gains information.
InfoMatrix relative_efficiency(const DesignLaw& law, const ProbPair& p, int n1);
InfoMatrix relative_efficiency(const DesignSpec& design, const ProbPair& p, int n1);

// Conditional bias of the UMLE, E[p-hat | N1 = n1] - p (mean minus truth).
Vec2 conditional_bias(const DesignLaw& law, const ProbPair& p, int n1);
Vec2 conditional_bias(const DesignSpec& design, const ProbPair& p, int n1);

// Lambda_n Var[p-hat|N] - I, in the layout where row k holds derivatives with
// respect to p_k: entry (k, j) = d b_j / d p_k.
InfoMatrix bias_jacobian(const DesignLaw& law, const ProbPair& p, int n1);
InfoMatrix bias_jacobian(const DesignSpec& design, const ProbPair& p, int n1);

struct CmleOptions {
    // stop once the residual max-norm falls below this
    double target = 1e-13;
    // a result is accepted only below this
    double tolerance = 1e-10;
    int max_newton = 100;
    int max_halvings = 30;
    double clamp = 1e-6;
};

struct CmleResult {
    ProbPair estimate;
    int iterations = 0;
    // max-norm of E_{p-tilde}[p-hat | N1] - p-hat_obs
    double residual = 0.0;
    // dh/dp at the solution, entry (j, k) = d h_j / d p_k = (Var Lambda)_{jk}
    InfoMatrix jacobian = InfoMatrix::Zero();
    bool used_bisection = false;
};

// Conditional MLE: the p solving E_p[p-hat | N1 = n1] = p-hat_obs. Newton
// with step halving from p-hat_obs, iterates clamped to [clamp, 1 - clamp];
// coordinate-wise bisection if Newton stalls.
// Throws NoInteriorSolution when the root lies at the clamp boundary, and
// the umle / conditioning errors for degenerate outcomes.
CmleResult cmle(const DesignLaw& law, const Outcome& o, const CmleOptions& opts = {});
CmleResult cmle(const DesignSpec& design, const Outcome& o, const CmleOptions& opts = {});

// CMLE over the closed square [0, 1]^2, defined for every outcome with both
// arms observed. Interior outcomes give cmle(). A coordinate with s_k in
// {0, n_k} sits at 0 or 1, where the conditional likelihood is maximized; the
// other coordinate then solves its moment equation on the slice S_k = s_k.
// Interior outcomes whose moment equation has no interior root get the edge
// point the solver converges to, with clamped coordinates set to 0 or 1.
ProbPair extended_cmle(const DesignLaw& law, const Outcome& o, const CmleOptions& opts = {});

// extended_cmle for every reachable outcome with 0 < n1 < n. The estimates do
// not depend on the true p, so one table serves a whole study grid.
class CmleTable {
   public:
    // `law` must outlive the table.
    explicit CmleTable(const DesignLaw& law, int threads = 1, const CmleOptions& opts = {});

    const DesignLaw& law() const { return *law_; }
    // False for empty arms, unreachable outcomes and solver failures.
    bool has(const Outcome& o) const;
    // Throws the stored solver error, or InvalidArgument for outcomes that
    // were never tabulated.
    const ProbPair& at(const Outcome& o) const;
    // Outcomes whose solve failed, with the error raised.
    struct Failure {
        Outcome outcome;
        ErrorKind kind;
        std::string message;
    };
    const std::vector<Failure>& failures() const { return failures_; }

   private:
    const DesignLaw* law_;
    std::vector<ProbPair> estimate_;
    // 0 not tabulated, 1 solved, 2 failed
    std::vector<std::uint8_t> state_;
    std::vector<Failure> failures_;
};

}  // namespace rarinf
