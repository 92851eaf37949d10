#include "papm/classifier.hpp"

#include <cmath>

namespace papm {

namespace {

bool is_zero(double v) { return std::abs(v) <= kParameterTolerance; }

}  // namespace

ClosednessEvidence evidence_from(const NablaTheta& nt) {
  return make_evidence(nt.residual_theta, nt.residual_theta_P, nt.tolerance);
}

ClosednessEvidence make_evidence(double residual_theta, double residual_theta_P, double tol) {
  return {residual_theta <= tol, residual_theta_P <= tol, residual_theta, residual_theta_P, tol};
}

ClosednessEvidence aggregate(std::span<const ClosednessEvidence> per_point) {
  ClosednessEvidence out{true, true, 0.0, 0.0, 0.0};
  for (const auto& e : per_point) {
    out.theta_closed = out.theta_closed && e.theta_closed;
    out.theta_P_closed = out.theta_P_closed && e.theta_P_closed;
    out.residual_theta = std::max(out.residual_theta, e.residual_theta);
    out.residual_theta_P = std::max(out.residual_theta_P, e.residual_theta_P);
    out.tolerance = std::max(out.tolerance, e.tolerance);
  }
  return out;
}

std::string to_string(CaseId c) {
  switch (c) {
    case CaseId::I_a: return "I_a";
    case CaseId::I_b: return "I_b";
    case CaseId::I_c: return "I_c";
    case CaseId::II: return "II";
  }
  return "";
}

std::string to_string(Expectation e) {
  switch (e) {
    case Expectation::yes: return "yes";
    case Expectation::no: return "no";
    case Expectation::conditional: return "conditional";
  }
  return "";
}

std::string to_string(Clause c) {
  switch (c) {
    case Clause::i: return "i";
    case Clause::ii: return "ii";
    case Clause::iii: return "iii";
    case Clause::iv: return "iv";
  }
  return "";
}

std::string to_string(Agreement a) {
  switch (a) {
    case Agreement::agree: return "agree";
    case Agreement::mismatch: return "mismatch";
    case Agreement::not_judged: return "not_judged";
  }
  return "";
}

std::string to_string(TorsionCase c) {
  switch (c) {
    case TorsionCase::i: return "i";
    case TorsionCase::ii: return "ii";
    case TorsionCase::iii: return "iii";
    case TorsionCase::iv: return "iv";
    case TorsionCase::inconsistent: return "inconsistent";
  }
  return "";
}

CaseId case_of(const ConnectionParams& cp, int n) {
  if (is_zero(cp.lambda) && is_zero(cp.mu)) return CaseId::I_a;
  if (is_zero(cp.lambda) && is_zero(cp.mu + 1.0 / (2.0 * n))) return CaseId::I_b;
  if (is_zero(discriminant(cp, n))) return CaseId::I_c;
  return CaseId::II;
}

ClassificationVerdict classify_connection(const ConnectionParams& cp, int n, const ClosednessEvidence& ev) {
  ClassificationVerdict v;
  v.case_id = case_of(cp, n);
  v.delta = discriminant(cp, n);
  const auto yes_if = [](bool b) { return b ? Expectation::yes : Expectation::no; };
  switch (v.case_id) {
    case CaseId::I_a:
      v.theorem43_clause = Clause::i;
      v.p_tensor_expected = yes_if(!ev.theta_closed && ev.theta_P_closed);
      v.notes = "connection D: P-tensor iff theta is not closed and theta o P is closed";
      if (ev.theta_closed && ev.theta_P_closed) {
        v.notes += "; degenerate evidence: both forms closed, so the 'theta not closed' half fails";
      }
      break;
    case CaseId::I_b:
      v.theorem43_clause = Clause::ii;
      v.p_tensor_expected = yes_if(ev.theta_closed && !ev.theta_P_closed);
      v.notes = "connection D~: P-tensor iff theta is closed and theta o P is not closed";
      if (ev.theta_closed && ev.theta_P_closed) {
        v.notes += "; degenerate evidence: both forms closed, so the 'theta o P not closed' half fails";
      }
      break;
    case CaseId::I_c:
      v.theorem43_clause = Clause::iv;
      v.p_tensor_expected = Expectation::conditional;
      v.notes =
          "lambda != 0 on Delta = 0: if R' is a P-tensor then theta and theta o P are not closed "
          "and the manifold lies outside W3bar and W6bar";
      if (ev.theta_closed && ev.theta_P_closed) {
        v.notes += "; degenerate evidence: both forms closed, the criterion holds trivially and R' is a P-tensor";
      }
      break;
    case CaseId::II:
      v.theorem43_clause = Clause::iii;
      v.p_tensor_expected = yes_if(ev.theta_closed && ev.theta_P_closed);
      v.notes = "Delta != 0: P-tensor iff theta and theta o P are closed";
      break;
  }
  return v;
}

Agreement judge(const ClassificationVerdict& v, bool numeric_p_tensor, const ClosednessEvidence& ev,
                bool pure_parity) {
  switch (v.p_tensor_expected) {
    case Expectation::yes: return numeric_p_tensor ? Agreement::agree : Agreement::mismatch;
    case Expectation::no: return numeric_p_tensor ? Agreement::mismatch : Agreement::agree;
    case Expectation::conditional:
      if (!numeric_p_tensor) return Agreement::not_judged;
      return (!ev.theta_closed && !ev.theta_P_closed && !pure_parity) ? Agreement::agree : Agreement::mismatch;
  }
  return Agreement::not_judged;
}

ResidualPair prop41_residuals(const Bilinear& U, const Bilinear& V, const StructuredPoint& pt,
                              const ConnectionParams& cp) {
  const Bilinear W = w_bilinear(pt);
  const double c = 1.0 / (2.0 * pt.n);
  return {max_abs(U - U.transpose() + cp.lambda * c * W), max_abs(V - V.transpose() + cp.mu * c * W)};
}

ResidualPair prop42_residuals(const Bilinear& nabla_theta, const StructuredPoint& pt,
                              const ConnectionParams& cp) {
  const Bilinear NP = nabla_theta * pt.P;
  const Bilinear x1 = nabla_theta - nabla_theta.transpose();
  const Bilinear x2 = NP - NP.transpose();
  const double mc = cp.mu + 1.0 / (2.0 * pt.n);
  return {max_abs(cp.lambda * x1 + mc * x2), max_abs(cp.mu * x1 + cp.lambda * x2)};
}

std::vector<Violation> cor52_check(const ClosednessEvidence& ev, const ClassFlags& flags, bool torsion_parallel) {
  std::vector<Violation> out;
  if (!torsion_parallel) return out;
  if (!ev.theta_P_closed) {
    out.push_back({"theta_P_closed", ev.residual_theta_P,
                   "parallel torsion requires theta o P to be closed"});
  }
  if ((flags.in_W3bar || flags.in_W6bar) && !ev.theta_closed) {
    out.push_back({"theta_closed", ev.residual_theta,
                   "parallel torsion on a W3bar or W6bar manifold requires theta to be closed"});
  }
  return out;
}

TorsionVerdict classify_parallel_torsion(const ConnectionParams& cp, const Bilinear& W, const ClassFlags& flags,
                                         double tol) {
  const bool l0 = is_zero(cp.lambda);
  const bool m0 = is_zero(cp.mu);
  const bool w0 = max_abs(W) <= tol;
  const bool pure = flags.is_W0 || flags.in_W3bar || flags.in_W6bar;
  TorsionVerdict v;
  if (l0 && m0) {
    if (!w0) {
      v.case_id = TorsionCase::i;
      v.requires_text = "nabla' = D with W != 0: manifold outside W3bar and W6bar";
      v.requirements_met = !pure;
    } else {
      v.case_id = TorsionCase::ii;
      v.requires_text = "nabla' = D with W = 0: manifold in W3bar or W6bar";
      v.requirements_met = pure;
    }
  } else if (l0) {
    v.case_id = TorsionCase::iii;
    v.requires_text = "lambda = 0, mu != 0: W = 0 and theta of pure parity (W3bar or W6bar)";
    v.requirements_met = w0 && pure;
  } else if (m0) {
    v.case_id = TorsionCase::iv;
    v.requires_text = "mu = 0, lambda != 0: W = 0 and theta of pure parity (W3bar or W6bar)";
    v.requirements_met = w0 && pure;
  } else {
    v.case_id = TorsionCase::inconsistent;
    v.requires_text = "lambda != 0 and mu != 0 is not among the enumerated cases; the hypothesis cannot hold";
    v.requirements_met = false;
  }
  return v;
}

}  // namespace papm
