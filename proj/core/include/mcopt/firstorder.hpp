#pragma once

#include <optional>
#include <vector>

#include "mcopt/problem.hpp"

namespace mcopt {

struct MfcqResult {
  bool holds = false;
  Vec witness;         ///< direction in phi coordinates (when the margin is positive)
  double margin = 0.0;  ///< optimal s of the strict-feasibility LP, capped at 1
  int rank_WG = 0;
};

struct CQReport {
  bool transversal = false;
  bool mfcq = false;
  bool zkrcq = false;
  bool licq = false;
  std::optional<Vec> mfcq_witness;
  double mfcq_margin = 0.0;
  int rank_transversal = 0;  ///< rank [G | basis T_qK]
  int rank_WG = 0;
  int rank_BG = 0;
  int n = 0;
  int k = 0;
  int ell = 0;
};

bool check_transversality(const LocalModel& lm, double tol = Tolerances::rank);
MfcqResult check_mfcq(const LocalModel& lm, double tol = 1e-9);
/// Independent path: solves e = G w - u, u in the inner tangent cone, for all +-e_j.
bool check_zkrcq(const LocalModel& lm, double tol = 1e-9);
bool check_licq(const LocalModel& lm, double tol = Tolerances::rank);
CQReport constraint_qualifications(const LocalModel& lm);

bool check_transversality(const ProblemInstance& prob, const Point& p, const ChartChoice& choice = {});
MfcqResult check_mfcq(const ProblemInstance& prob, const Point& p, const ChartChoice& choice = {});
bool check_zkrcq(const ProblemInstance& prob, const Point& p, const ChartChoice& choice = {});
bool check_licq(const ProblemInstance& prob, const Point& p, const ChartChoice& choice = {});
CQReport constraint_qualifications(const ProblemInstance& prob, const Point& p, const ChartChoice& choice = {});

struct KKTCertificate {
  Vec mu_chart;  ///< multiplier in psi coordinates: A_I' lambda_I + A_E' lambda_E
  Vec mu_frame;  ///< same covector in the canonical frame of T_qN
  Vec lambda_I;
  Vec lambda_E;
  double residual = 0.0;   ///< |f'_phi + G' mu_chart|
  double grad_norm = 0.0;  ///< |f'_phi|
  std::vector<bool> strongly_active;  ///< per inequality row: lambda_I > tol_act
  std::vector<int> row_ids;
  ChartChoice choice;

  bool is_kkt(double tol = Tolerances::kkt) const { return residual <= tol * (1.0 + grad_norm); }
};

/// Minimal-residual multiplier, whether or not it certifies KKT.
KKTCertificate fit_multiplier(const LocalModel& lm, double tol_act = Tolerances::activity);
/// Certificate iff the residual is within tol (1 + |f'|); nullopt means no multiplier.
std::optional<KKTCertificate> solve_kkt(const LocalModel& lm, double tol = Tolerances::kkt,
                                        double tol_act = Tolerances::activity);
std::optional<KKTCertificate> solve_kkt(const ProblemInstance& prob, const Point& p, double tol = Tolerances::kkt,
                                        const ChartChoice& choice = {});

struct MultiplierSetProbe {
  bool unique = true;
  int dim_estimate = 0;
};

MultiplierSetProbe multiplier_set_probe(const LocalModel& lm, const KKTCertificate& cert, double tol = 1e-9);

struct ClassicalKKT {
  Vec eta_I;
  Vec eta_E;
  std::vector<bool> active;  ///< g_I,i(x) = 0 within tolerance
  double stationarity = 0.0;   ///< |grad f + g_I' eta_I + g_E' eta_E|
  double complementarity = 0.0;  ///< max |eta_I,i g_I,i(x)|
};

/// Throws ModelMismatch unless prob is a Euclidean NLP.
ClassicalKKT classical_report(const KKTCertificate& cert, const ProblemInstance& prob, const Point& p);

}  // namespace mcopt
