#pragma once

// Birth-death chains on ℕ₀: series certificates, classification of the
// Neumann-Feller property, α-harmonic recursions and the Hamburger series.

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "expression.hpp"

namespace nlab {

struct BdChain {
  std::string name = "chain";
  std::function<double(long long)> rate;     // b(r, r+1)
  std::function<double(long long)> measure;  // m(r)
  std::function<Rational(long long)> exact_rate;     // optional
  std::function<Rational(long long)> exact_measure;  // optional
  std::optional<AsymptoticClass> rate_class;
  std::optional<AsymptoticClass> measure_class;
  std::optional<double> measure_total;        // known m(X) when finite
  std::function<double(long long)> tail;      // optional m({k > r})
};

enum class Verdict { Convergent, Divergent, Undetermined };
enum class Tri { False, True, Undetermined };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Convergent: return "convergent";
    case Verdict::Divergent: return "divergent";
    default: return "undetermined";
  }
}
inline const char* to_string(Tri v) {
  switch (v) {
    case Tri::True: return "true";
    case Tri::False: return "false";
    default: return "undetermined";
  }
}

// A verdict together with the argument supporting it: "assert", "geometric",
// "harmonic" or "p=<x>" (comparison with Σ r^{-x}).
struct Certificate {
  Verdict verdict = Verdict::Undetermined;
  std::string method;
};

// Keys: measure, inv_b, tail, hamburger.
using CertificateSet = std::map<std::string, Certificate>;

inline const std::vector<std::string>& series_names() {
  static const std::vector<std::string> names{"measure", "inv_b", "tail", "hamburger"};
  return names;
}

// "inv_b=divergent:harmonic", "measure=convergent:p=2", "tail=divergent:assert".
inline std::pair<std::string, Certificate> parse_certificate(const std::string& text) {
  const auto eq = text.find('=');
  const auto colon = text.find(':', eq == std::string::npos ? 0 : eq);
  if (eq == std::string::npos || colon == std::string::npos)
    throw ParseError("certificate must look like series=verdict:method, got \"" + text + "\"");
  const std::string series = text.substr(0, eq);
  const std::string verdict = text.substr(eq + 1, colon - eq - 1);
  const std::string method = text.substr(colon + 1);
  bool known = false;
  for (const auto& s : series_names()) known = known || s == series;
  if (!known) throw ParseError("unknown series \"" + series + "\" in certificate");
  Certificate c;
  if (verdict == "convergent") c.verdict = Verdict::Convergent;
  else if (verdict == "divergent") c.verdict = Verdict::Divergent;
  else throw ParseError("verdict must be convergent or divergent, got \"" + verdict + "\"");
  if (method == "assert" || method == "harmonic" || method == "geometric") {
    c.method = method;
  } else if (method.rfind("p=", 0) == 0) {
    try {
      std::size_t used = 0;
      std::stod(method.substr(2), &used);
      if (used != method.size() - 2) throw std::invalid_argument(method);
    } catch (const std::exception&) {
      throw ParseError("bad comparison exponent in \"" + method + "\"");
    }
    c.method = method;
  } else {
    throw ParseError("unknown certificate method \"" + method + "\"");
  }
  return {series, c};
}

// Leading-order classes of the four series' summands, where derivable.
inline std::map<std::string, AsymptoticClass> summand_classes(const BdChain& chain) {
  std::map<std::string, AsymptoticClass> out;
  if (chain.measure_class) out["measure"] = *chain.measure_class;
  if (chain.rate_class) out["inv_b"] = reciprocal(*chain.rate_class);
  if (chain.measure_class && chain.rate_class) {
    const AsymptoticClass inv_b = reciprocal(*chain.rate_class);
    if (auto tail = tail_sum_class(*chain.measure_class)) out["tail"] = *tail * inv_b;
    if (auto conv = series_converges(inv_b)) {
      AsymptoticClass s = *conv ? AsymptoticClass{1, 0, 0, 1} : *partial_sum_class(inv_b);
      out["hamburger"] = s * s * shifted(*chain.measure_class);
    }
  }
  return out;
}

namespace detail {

inline std::string comparison_method(const AsymptoticClass& a) {
  if (!near_one(a.q)) return "geometric";
  if (a.p == -1.0 && a.l == 0.0) return "harmonic";
  std::ostringstream s;
  s << "p=" << -a.p;
  return s.str();
}

}  // namespace detail

// Certificates read off the symbolic summand classes. The tail series of a
// chain with infinite measure is divergent term by term.
inline CertificateSet symbolic_certificates(const BdChain& chain) {
  CertificateSet out;
  for (const auto& [name, cls] : summand_classes(chain)) {
    if (auto conv = series_converges(cls))
      out[name] = {*conv ? Verdict::Convergent : Verdict::Divergent, detail::comparison_method(cls)};
  }
  if (out.count("measure") && out["measure"].verdict == Verdict::Divergent)
    out["tail"] = {Verdict::Divergent, "infinite measure"};
  return out;
}

namespace detail {

// Rejects certificates that contradict the symbolic class of the summand.
inline void validate_certificate(const std::string& series, const Certificate& c,
                                 const std::map<std::string, AsymptoticClass>& classes) {
  if (c.method.rfind("p=", 0) == 0) {
    const double x = std::stod(c.method.substr(2));
    if ((x <= 1.0) != (c.verdict == Verdict::Divergent))
      throw ParameterError(series + ": comparison exponent " + c.method +
                           " does not support the claimed verdict");
  }
  auto it = classes.find(series);
  if (it == classes.end()) return;
  const AsymptoticClass& a = it->second;
  auto conv = series_converges(a);
  if (conv && (*conv ? Verdict::Convergent : Verdict::Divergent) != c.verdict)
    throw ParameterError(series + ": certificate contradicts the summand class " + describe(a));
  if (c.method == "geometric" && near_one(a.q))
    throw ParameterError(series + ": geometric comparison needs a ratio different from 1");
  if (c.method == "harmonic" && !(near_one(a.q) && a.p == -1.0))
    throw ParameterError(series + ": summand is not of harmonic order " + describe(a));
  if (c.method.rfind("p=", 0) == 0 &&
      !(near_one(a.q) && std::abs(a.p + std::stod(c.method.substr(2))) < 1e-12))
    throw ParameterError(series + ": summand is not of order r^{-" + c.method.substr(2) + "}");
}

}  // namespace detail

struct SeriesRecord {
  std::string name;
  std::vector<double> partial;  // partial sums up to r = 0..horizon
  Verdict verdict = Verdict::Undetermined;
  std::string method;
};

struct BdClassification {
  int horizon = 0;
  std::optional<double> measure_total;  // nullopt when infinite or unknown
  bool measure_infinite = false;
  bool measure_total_estimated = false;
  SeriesRecord measure, inv_b, tail, hamburger;
  Tri neumann_feller = Tri::Undetermined;
  Tri nontrivial_l1_harmonic_exists = Tri::Undetermined;
  Tri ess_self_adjoint = Tri::Undetermined;
  // Neumann-Feller must come with a divergent Hamburger series.
  Tri hamburger_consistent = Tri::Undetermined;

  bool undetermined() const {
    return neumann_feller == Tri::Undetermined || ess_self_adjoint == Tri::Undetermined;
  }
};

namespace detail {

inline void apply_certificate(SeriesRecord& s, const CertificateSet& certs,
                              const std::map<std::string, AsymptoticClass>& classes) {
  auto it = certs.find(s.name);
  if (it == certs.end()) return;
  validate_certificate(s.name, it->second, classes);
  s.verdict = it->second.verdict;
  s.method = it->second.method;
}

inline void require_chain(const BdChain& chain) {
  if (!chain.rate || !chain.measure) throw ParameterError("chain needs rate and measure");
}

}  // namespace detail

// Σ_{r ≤ R} (Σ_{k ≤ r} 1/b(k, k+1))² m(r+1) for R = 0..horizon-1.
inline SeriesRecord hamburger_series(const BdChain& chain, int horizon,
                                     const std::optional<Certificate>& certificate = {}) {
  detail::require_chain(chain);
  if (horizon < 1) throw ParameterError("horizon must be at least 1");
  SeriesRecord s{"hamburger", {}, Verdict::Undetermined, ""};
  double inv = 0.0, sum = 0.0;
  for (int r = 0; r < horizon; ++r) {
    inv += 1.0 / chain.rate(r);
    sum += inv * inv * chain.measure(r + 1);
    s.partial.push_back(sum);
  }
  if (certificate) {
    CertificateSet certs{{"hamburger", *certificate}};
    detail::apply_certificate(s, certs, summand_classes(chain));
  }
  return s;
}

inline BdClassification classify(const BdChain& chain, int horizon, const CertificateSet& certs) {
  detail::require_chain(chain);
  if (horizon < 1) throw ParameterError("horizon must be at least 1");
  const auto classes = summand_classes(chain);
  BdClassification out;
  out.horizon = horizon;
  out.measure.name = "measure";
  out.inv_b.name = "inv_b";
  out.tail.name = "tail";

  double msum = 0.0, isum = 0.0;
  std::vector<double> mpartial;
  for (int r = 0; r <= horizon; ++r) {
    msum += chain.measure(r);
    isum += 1.0 / chain.rate(r);
    out.measure.partial.push_back(msum);
    out.inv_b.partial.push_back(isum);
  }
  detail::apply_certificate(out.measure, certs, classes);
  detail::apply_certificate(out.inv_b, certs, classes);
  detail::apply_certificate(out.tail, certs, classes);

  if (out.measure.verdict == Verdict::Divergent) {
    out.measure_infinite = true;
    out.tail.partial.assign(static_cast<std::size_t>(horizon) + 1,
                            std::numeric_limits<double>::infinity());
    if (out.tail.verdict == Verdict::Convergent)
      throw ParameterError("tail: a convergent certificate contradicts infinite measure");
    out.tail.verdict = Verdict::Divergent;
    if (out.tail.method.empty()) out.tail.method = "infinite measure";
  } else {
    if (chain.measure_total) {
      out.measure_total = chain.measure_total;
    } else if (out.measure.verdict == Verdict::Convergent) {
      double rest = 0.0;
      if (chain.measure_class)
        if (auto t = tail_sum_class(*chain.measure_class))
          rest = t->C * std::pow(static_cast<double>(horizon), t->p) *
                 std::pow(std::log(static_cast<double>(horizon)), t->l) * std::pow(t->q, horizon);
      out.measure_total = msum + rest;
      out.measure_total_estimated = true;
    }
    double tsum = 0.0, before = 0.0;
    for (int r = 0; r <= horizon; ++r) {
      before += chain.measure(r);
      double t;
      if (chain.tail) t = chain.tail(r);
      else if (out.measure_total) t = std::max(0.0, *out.measure_total - before);
      else t = std::numeric_limits<double>::quiet_NaN();
      tsum += t / chain.rate(r);
      out.tail.partial.push_back(tsum);
    }
  }

  std::optional<Certificate> hcert;
  if (auto it = certs.find("hamburger"); it != certs.end()) hcert = it->second;
  out.hamburger = hamburger_series(chain, horizon, hcert);

  const Verdict m = out.measure.verdict, ib = out.inv_b.verdict, tl = out.tail.verdict;
  if (m == Verdict::Divergent || (ib == Verdict::Divergent && tl == Verdict::Divergent))
    out.neumann_feller = Tri::True;
  else if (m == Verdict::Convergent && (ib == Verdict::Convergent || tl == Verdict::Convergent))
    out.neumann_feller = Tri::False;

  switch (out.neumann_feller) {
    case Tri::True: out.nontrivial_l1_harmonic_exists = Tri::False; break;
    case Tri::False: out.nontrivial_l1_harmonic_exists = Tri::True; break;
    default: break;
  }

  const Verdict h = out.hamburger.verdict;
  if (out.neumann_feller == Tri::True) {
    out.ess_self_adjoint = Tri::True;
    out.hamburger_consistent = h == Verdict::Divergent  ? Tri::True
                               : h == Verdict::Convergent ? Tri::False
                                                          : Tri::Undetermined;
  } else {
    if (h == Verdict::Divergent) out.ess_self_adjoint = Tri::True;
    else if (h == Verdict::Convergent) out.ess_self_adjoint = Tri::False;
    out.hamburger_consistent = out.neumann_feller == Tri::False ? Tri::True : Tri::Undetermined;
  }
  return out;
}

struct HarmonicSolution {
  double alpha = 0.0;
  double u0 = 0.0;
  bool trivial = false;
  std::vector<double> values;          // u(r); ±inf once |u| leaves the double range
  std::vector<double> log_abs;         // log|u(r)|
  std::vector<double> partial_l1;      // Σ_{k≤r} u(k) m(k); may overflow
  std::vector<double> log_partial_l1;  // log Σ_{k≤r} |u(k)| m(k)
  // α̃ Σ_{s<r} m(B_s^c ∩ [0, r]) / b(s, s+1) with α̃ = α|u(0)|m(0).
  std::vector<double> lemma_bound;
  double residual = 0.0;  // max relative |(Δ+α)u| over r < horizon
  bool lemma_holds = true;
};

// u(1) = u(0)(1 + αm(0)/b(0,1)) and
// u(r+1) = u(r) + [b(r-1,r)(u(r) - u(r-1)) + αm(r)u(r)] / b(r,r+1),
// written with the flux δ_r = Σ_{k≤r} αm(k)u(k) = b(r,r+1)(u(r+1) - u(r)).
// Values above 1e100 are rescaled and tracked through a log offset.
inline HarmonicSolution solve_alpha_harmonic(const BdChain& chain, double alpha, double u0,
                                             int horizon, double lemma_rel_tol = 1e-12) {
  detail::require_chain(chain);
  if (!(alpha > 0.0)) throw DomainError("alpha must be positive");
  if (horizon < 2) throw ParameterError("horizon must be at least 2");
  HarmonicSolution out;
  out.alpha = alpha;
  out.u0 = u0;
  const auto n = static_cast<std::size_t>(horizon) + 1;
  if (u0 == 0.0) {
    out.trivial = true;
    out.values.assign(n, 0.0);
    out.log_abs.assign(n, -std::numeric_limits<double>::infinity());
    out.partial_l1.assign(n, 0.0);
    out.log_partial_l1 = out.log_abs;
    out.lemma_bound.assign(n, 0.0);
    return out;
  }
  const double sign = u0 < 0.0 ? -1.0 : 1.0;
  const double a0 = std::abs(u0);
  const double alpha_tilde = alpha * a0 * chain.measure(0);
  constexpr double kRescale = 1e100;
  const double log_rescale = std::log(kRescale);

  double shift = 0.0;
  double prev = 0.0, cur = a0;
  double flux = alpha * chain.measure(0) * a0;
  double l1 = a0 * chain.measure(0);
  double inv_b = 0.0, bound = 0.0;

  auto record = [&](double u) {
    const double lu = std::log(u) + shift;
    out.log_abs.push_back(lu);
    out.values.push_back(shift == 0.0 ? sign * u : sign * std::exp(lu));
    const double ll = std::log(l1) + shift;
    out.log_partial_l1.push_back(ll);
    out.partial_l1.push_back(shift == 0.0 ? sign * l1 : sign * std::exp(ll));
    out.lemma_bound.push_back(alpha_tilde * bound);
    if (bound > 0.0 && ll < std::log(alpha_tilde * bound) + std::log1p(-lemma_rel_tol))
      out.lemma_holds = false;
  };
  record(cur);

  for (int r = 0; r < horizon; ++r) {
    const double b = chain.rate(r);
    const double next = cur + flux / b;
    if (!(flux > 0.0) || !(next >= cur))
      throw InvariantViolation("alpha-harmonic recursion is not increasing at r = " +
                               std::to_string(r));
    const double m = chain.measure(r);
    double lap = b * (cur - next);
    double scale = b * (cur + next);
    if (r > 0) {
      const double bl = chain.rate(r - 1);
      lap += bl * (cur - prev);
      scale += bl * (cur + prev);
    }
    out.residual = std::max(out.residual, std::abs(lap / m + alpha * cur) / (scale / m + alpha * cur));

    const double m_next = chain.measure(r + 1);
    prev = cur;
    cur = next;
    flux += alpha * m_next * cur;
    l1 += cur * m_next;
    inv_b += 1.0 / b;
    bound += m_next * inv_b;
    if (cur > kRescale) {
      prev /= kRescale;
      cur /= kRescale;
      flux /= kRescale;
      l1 /= kRescale;
      shift += log_rescale;
    }
    record(cur);
  }
  return out;
}

struct ExactHarmonicSolution {
  std::vector<Rational> values;
  std::vector<Rational> partial_l1;
  std::vector<Rational> lemma_bound;
  bool lemma_holds = true;
  bool increasing = true;
};

// The same recursion in exact rational arithmetic (requires exact rates and
// measures).
inline ExactHarmonicSolution solve_alpha_harmonic_exact(const BdChain& chain, const Rational& alpha,
                                                        const Rational& u0, int horizon) {
  if (!chain.exact_rate || !chain.exact_measure)
    throw ParameterError("chain has no exact rate/measure representation");
  if (alpha <= 0) throw DomainError("alpha must be positive");
  if (horizon < 2) throw ParameterError("horizon must be at least 2");
  ExactHarmonicSolution out;
  const Rational m0 = chain.exact_measure(0);
  const Rational a0 = u0 < 0 ? Rational(-u0) : u0;
  const Rational alpha_tilde = alpha * a0 * m0;
  Rational cur = u0, flux = alpha * m0 * u0, l1 = u0 * m0, inv_b = 0, bound = 0;
  out.values.push_back(cur);
  out.partial_l1.push_back(l1);
  out.lemma_bound.push_back(0);
  for (int r = 0; r < horizon; ++r) {
    const Rational next = cur + flux / chain.exact_rate(r);
    if (u0 != 0 && (u0 > 0 ? next <= cur : next >= cur)) out.increasing = false;
    const Rational m_next = chain.exact_measure(r + 1);
    inv_b += 1 / chain.exact_rate(r);
    bound += m_next * inv_b;
    cur = next;
    flux += alpha * m_next * cur;
    l1 += cur * m_next;
    out.values.push_back(cur);
    out.partial_l1.push_back(l1);
    out.lemma_bound.push_back(alpha_tilde * bound);
    const Rational lhs = u0 < 0 ? Rational(-l1) : l1;
    if (lhs < alpha_tilde * bound) out.lemma_holds = false;
  }
  return out;
}

}  // namespace nlab
