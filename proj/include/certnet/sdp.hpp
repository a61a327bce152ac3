#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <nlohmann/json.hpp>

namespace certnet {

/// maximize c'y  s.t.  F0_b + sum_j y_j F_j_b >= 0 for every block b,
///                     A y = b.
/// Blocks are either dense symmetric (PSD) or diagonal (elementwise >= 0).
/// Entries are accumulated through AddBlockEntry; only i <= j is stored for
/// PSD blocks.
class LmiProblem {
 public:
  static constexpr int kConstant = -1;

  enum class BlockKind { kPsd, kNonneg };

  struct Block {
    BlockKind kind;
    int size;
    /// (packed entry, variable + 1, value); variable 0 is the constant.
    std::vector<Eigen::Triplet<double>> entries;
  };

  int num_vars() const { return num_vars_; }
  int AddVariables(int count);
  int AddPsdBlock(int size);
  int AddNonnegBlock(int size);
  /// Adds value * y_var (or the constant when var == kConstant) to entry
  /// (i, j) of a block; symmetric counterparts are implied.
  void AddBlockEntry(int block, int i, int j, int var, double value);
  /// sum terms = rhs.
  void AddEquality(const std::vector<std::pair<int, double>>& terms,
                   double rhs);
  void SetObjective(int var, double coef);
  /// Convenience: lo <= y_var <= hi via a 2-entry diagonal block.
  void AddBounds(int var, double lo, double hi);
  void AddLowerBound(int var, double lo);

  const std::vector<Block>& blocks() const { return blocks_; }
  const Eigen::VectorXd& objective() const { return objective_; }
  int num_equalities() const { return static_cast<int>(eq_rhs_.size()); }
  Eigen::SparseMatrix<double> EqualityMatrix() const;
  Eigen::VectorXd EqualityRhs() const;

  /// Per-block sparse map [1; y] -> packed entries.
  Eigen::SparseMatrix<double> BlockMap(int b) const;
  /// Evaluates F_b(y) as a dense symmetric matrix (diagonal blocks too).
  Eigen::MatrixXd EvaluateBlock(int b, const Eigen::VectorXd& y) const;

  nlohmann::json DebugDump() const;

 private:
  int num_vars_ = 0;
  Eigen::VectorXd objective_;
  std::vector<Block> blocks_;
  std::vector<Eigen::Triplet<double>> eq_entries_;
  std::vector<double> eq_rhs_;
};

enum class SolveStatus { kOptimal, kFeasible, kInfeasible, kNumericalFailure };

std::string ToString(SolveStatus s);

struct SdpOptions {
  double feas_tol = 1e-8;
  double gap_tol = 1e-6;
  int max_iter = 200;
  double regularization = 1e-10;
  /// Largest accepted negative eigenvalue of a returned block.
  double psd_tol = 1e-8;
  bool verbose = false;
};

struct LmiSolution {
  SolveStatus status = SolveStatus::kNumericalFailure;
  Eigen::VectorXd y;
  std::vector<Eigen::MatrixXd> blocks;  // F_b(y)
  double objective = 0.0;
  double primal_residual = 0.0;  // relative, conic form
  double dual_residual = 0.0;    // relative, conic form
  double gap = 0.0;              // relative duality gap
  double equality_residual = 0.0;
  double min_eigenvalue = 0.0;   // over all blocks of F(y)
  int iterations = 0;
  std::vector<double> gap_history;
  std::string message;

  bool ok() const {
    return status == SolveStatus::kOptimal || status == SolveStatus::kFeasible;
  }
};

LmiSolution Solve(const LmiProblem& p, const SdpOptions& opts = {});

struct PsdResult {
  bool psd;
  double min_eigenvalue;
};

/// Eigenvalue test M >= -tol I.  Throws if M is not symmetric to 1e-10
/// (relative to its largest entry).
PsdResult PsdCheck(const Eigen::MatrixXd& m, double tol);

}  // namespace certnet
