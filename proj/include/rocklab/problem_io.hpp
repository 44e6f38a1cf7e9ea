#pragma once

#include <charconv>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rocklab/composite.hpp"
#include "rocklab/extreal.hpp"

namespace rocklab {

// Line-oriented problem-spec format, '#' starts a comment:
//   n <dim> m <dim>
//   X whole | box <l1> <u1> ... | nonpos | zero | rplus <eps> | finite <k> <coords...>
//   f0 poly <terms>            term: <coef>:<e1>,...,<en>
//   F<i> poly|invpoly <terms>
//   h izero | inonpos | goal <theta...> <tau...> | wsum <p...>
//     | pwamax <k> <slope> <intercept> ... | maxco | sep <spec> ; <spec> ...
//   anchor <u1> ... <um>

namespace detail {

inline double parse_num(const std::string& tok, int lineno) {
  try {
    ExtReal v = parse_ext_real(tok);
    return v.value();
  } catch (const std::exception&) {
    throw std::invalid_argument("problem line " + std::to_string(lineno) + ": bad number '" + tok + "'");
  }
}

inline PolyTerm parse_term(const std::string& tok, std::size_t n, int lineno) {
  const auto colon = tok.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("problem line " + std::to_string(lineno) + ": term needs '<coef>:<exps>'");
  PolyTerm t;
  t.coef = parse_num(tok.substr(0, colon), lineno);
  std::string rest = tok.substr(colon + 1);
  std::replace(rest.begin(), rest.end(), ',', ' ');
  std::istringstream es(rest);
  int e = 0;
  while (es >> e) t.exps.push_back(e);
  if (t.exps.size() != n)
    throw std::invalid_argument("problem line " + std::to_string(lineno) + ": expected " + std::to_string(n) +
                                " exponents");
  return t;
}

inline MonitoringFn parse_monitoring(std::istringstream& ls, std::size_t m, int lineno);

inline MonitoringFn parse_monitoring_spec(const std::string& spec, std::size_t m, int lineno) {
  std::istringstream ls(spec);
  return parse_monitoring(ls, m, lineno);
}

inline MonitoringFn parse_monitoring(std::istringstream& ls, std::size_t m, int lineno) {
  std::string kind;
  if (!(ls >> kind)) throw std::invalid_argument("problem line " + std::to_string(lineno) + ": missing h variant");
  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument("problem line " + std::to_string(lineno) + ": " + msg);
  };
  if (kind == "izero") return MonitoringFn::indicator_zero(m);
  if (kind == "inonpos") return MonitoringFn::indicator_nonpos(m);
  if (kind == "maxco") return MonitoringFn::max_of_coords(m);
  if (kind == "goal") {
    Vec theta(m), tau(m);
    for (auto& v : theta)
      if (!(ls >> v)) fail("goal needs m weights and m goals");
    for (auto& v : tau)
      if (!(ls >> v)) fail("goal needs m weights and m goals");
    return MonitoringFn::goal_penalty(theta, tau);
  }
  if (kind == "wsum") {
    Vec p(m);
    for (auto& v : p)
      if (!(ls >> v)) fail("wsum needs m weights");
    return MonitoringFn::weighted_sum(p);
  }
  if (kind == "pwamax") {
    std::size_t k = 0;
    if (!(ls >> k) || k == 0) fail("pwamax needs a piece count");
    std::vector<PwaMax::Piece> pieces(k);
    for (auto& pc : pieces)
      if (!(ls >> pc.slope >> pc.intercept)) fail("pwamax needs slope/intercept pairs");
    return MonitoringFn::pwa_max(pieces, m);
  }
  if (kind == "sep") {
    std::string rest;
    std::getline(ls, rest);
    std::vector<MonitoringFn> parts;
    std::size_t start = 0;
    while (start <= rest.size()) {
      std::size_t semi = rest.find(';', start);
      const std::string spec = rest.substr(start, semi == std::string::npos ? std::string::npos : semi - start);
      if (spec.find_first_not_of(" \t") != std::string::npos)
        parts.push_back(parse_monitoring_spec(spec, 1, lineno));
      if (semi == std::string::npos) break;
      start = semi + 1;
    }
    if (parts.size() != m) fail("sep needs exactly m scalar parts");
    return MonitoringFn::separable(std::move(parts));
  }
  fail("unknown h variant '" + kind + "'");
  throw std::logic_error("unreachable");
}

}  // namespace detail

inline Rockafellian parse_problem(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::optional<std::size_t> n, m;
  std::optional<FeasibleSet> X;
  std::optional<PolyMap> f0;
  std::vector<std::optional<PolyOutput>> F_outputs;
  std::optional<MonitoringFn> h;
  std::optional<Vec> anchor;

  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument("problem line " + std::to_string(lineno) + ": " + msg);
  };
  auto need_dims = [&]() {
    if (!n || !m) fail("'n <dim> m <dim>' must come first");
  };

  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag[0] == '#') continue;
    if (tag == "n") {
      long nv = 0, mv = 0;
      std::string mk;
      if (!(ls >> nv >> mk >> mv) || mk != "m" || nv < 1 || mv < 1) fail("expected 'n <dim> m <dim>'");
      n = static_cast<std::size_t>(nv);
      m = static_cast<std::size_t>(mv);
      F_outputs.assign(*m, std::nullopt);
    } else if (tag == "X") {
      need_dims();
      std::string kind;
      if (!(ls >> kind)) fail("missing X variant");
      if (kind == "whole")
        X = FeasibleSet::whole(*n);
      else if (kind == "nonpos")
        X = FeasibleSet::nonpos(*n);
      else if (kind == "zero")
        X = FeasibleSet::zero(*n);
      else if (kind == "rplus") {
        double eps = 0.0;
        if (!(ls >> eps)) fail("rplus needs a lower bound");
        X = FeasibleSet::positive_ray(eps);
      } else if (kind == "box") {
        Vec lo(*n), hi(*n);
        for (std::size_t i = 0; i < *n; ++i) {
          std::string a, b;
          if (!(ls >> a >> b)) fail("box needs n lower/upper pairs");
          lo[i] = detail::parse_num(a, lineno);
          hi[i] = detail::parse_num(b, lineno);
        }
        X = FeasibleSet::box(lo, hi);
      } else if (kind == "finite") {
        std::size_t k = 0;
        if (!(ls >> k) || k == 0) fail("finite needs a point count");
        std::vector<Vec> pts(k, Vec(*n));
        for (auto& p : pts)
          for (auto& v : p)
            if (!(ls >> v)) fail("finite needs k*n coordinates");
        X = FeasibleSet::finite(std::move(pts));
      } else
        fail("unknown X variant '" + kind + "'");
    } else if (tag == "f0") {
      need_dims();
      std::string kind;
      if (!(ls >> kind) || (kind != "poly" && kind != "invpoly")) fail("f0 must be 'poly' or 'invpoly'");
      PolyOutput out;
      out.inverse = (kind == "invpoly");
      std::string tok;
      while (ls >> tok) out.terms.push_back(detail::parse_term(tok, *n, lineno));
      f0 = PolyMap(*n, {out});
    } else if (tag.size() > 1 && tag[0] == 'F') {
      need_dims();
      std::size_t idx = 0;
      const auto [p, ec] = std::from_chars(tag.data() + 1, tag.data() + tag.size(), idx);
      if (ec != std::errc() || p != tag.data() + tag.size()) fail("bad output tag '" + tag + "'");
      if (idx < 1 || idx > *m) fail("output index out of range in '" + tag + "'");
      std::string kind;
      if (!(ls >> kind) || (kind != "poly" && kind != "invpoly")) fail("F output must be 'poly' or 'invpoly'");
      PolyOutput out;
      out.inverse = (kind == "invpoly");
      std::string tok;
      while (ls >> tok) out.terms.push_back(detail::parse_term(tok, *n, lineno));
      F_outputs[idx - 1] = std::move(out);
    } else if (tag == "h") {
      need_dims();
      h = detail::parse_monitoring(ls, *m, lineno);
    } else if (tag == "anchor") {
      need_dims();
      Vec a(*m);
      for (auto& v : a)
        if (!(ls >> v)) fail("anchor needs m entries");
      anchor = a;
    } else {
      fail("unknown record '" + tag + "'");
    }
  }
  lineno = 0;
  if (!n || !m) throw std::invalid_argument("problem: missing 'n ... m ...' line");
  if (!X) throw std::invalid_argument("problem: missing X");
  if (!f0) throw std::invalid_argument("problem: missing f0");
  if (!h) throw std::invalid_argument("problem: missing h");
  std::vector<PolyOutput> fouts;
  for (std::size_t i = 0; i < *m; ++i) {
    if (!F_outputs[i]) throw std::invalid_argument("problem: missing F" + std::to_string(i + 1));
    fouts.push_back(*F_outputs[i]);
  }
  CompositeProblem P(*X, *f0, PolyMap(*n, fouts), *h);
  return anchor ? Rockafellian(std::move(P), *anchor) : Rockafellian(std::move(P));
}

namespace detail {

inline std::string render_terms(const PolyOutput& out) {
  std::ostringstream os;
  os << (out.inverse ? "invpoly" : "poly");
  for (const auto& t : out.terms) {
    os << " " << to_string(ExtReal(t.coef)) << ":";
    for (std::size_t j = 0; j < t.exps.size(); ++j) os << (j ? "," : "") << t.exps[j];
  }
  return os.str();
}

inline std::string render_monitoring(const MonitoringFn& h) {
  return std::visit(
      [&](const auto& f) -> std::string {
        using T = std::decay_t<decltype(f)>;
        std::ostringstream os;
        if constexpr (std::is_same_v<T, IndicatorZero>)
          os << "izero";
        else if constexpr (std::is_same_v<T, IndicatorNonpos>)
          os << "inonpos";
        else if constexpr (std::is_same_v<T, MaxOfCoords>)
          os << "maxco";
        else if constexpr (std::is_same_v<T, GoalPenalty>) {
          os << "goal";
          for (double v : f.theta) os << " " << to_string(ExtReal(v));
          for (double v : f.tau) os << " " << to_string(ExtReal(v));
        } else if constexpr (std::is_same_v<T, WeightedSum>) {
          os << "wsum";
          for (double v : f.p) os << " " << to_string(ExtReal(v));
        } else if constexpr (std::is_same_v<T, PwaMax>) {
          os << "pwamax " << f.pieces.size();
          for (const auto& pc : f.pieces)
            os << " " << to_string(ExtReal(pc.slope)) << " " << to_string(ExtReal(pc.intercept));
        } else if constexpr (std::is_same_v<T, Separable>) {
          os << "sep";
          for (std::size_t i = 0; i < f.parts.size(); ++i)
            os << (i ? " ; " : " ") << render_monitoring(f.parts[i]);
        }
        return os.str();
      },
      h.v);
}

}  // namespace detail

inline std::string serialize_problem(const Rockafellian& R) {
  const CompositeProblem& P = R.problem;
  std::ostringstream os;
  os << "n " << P.n() << " m " << P.m() << "\n";
  os << "X ";
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, WholeSpace>)
          os << "whole";
        else if constexpr (std::is_same_v<T, NonposOrthant>)
          os << "nonpos";
        else if constexpr (std::is_same_v<T, SingletonZero>)
          os << "zero";
        else if constexpr (std::is_same_v<T, PositiveRay>)
          os << "rplus " << to_string(ExtReal(s.eps));
        else if constexpr (std::is_same_v<T, Box>) {
          os << "box";
          for (std::size_t i = 0; i < s.lower.size(); ++i)
            os << " " << to_string(ExtReal(s.lower[i])) << " " << to_string(ExtReal(s.upper[i]));
        } else if constexpr (std::is_same_v<T, FinitePointSet>) {
          os << "finite " << s.points.size();
          for (const auto& p : s.points)
            for (double v : p) os << " " << to_string(ExtReal(v));
        }
      },
      P.X.variant());
  os << "\n";
  os << "f0 " << detail::render_terms(P.f0.outputs()[0]) << "\n";
  for (std::size_t i = 0; i < P.m(); ++i)
    os << "F" << (i + 1) << " " << detail::render_terms(P.F.outputs()[i]) << "\n";
  os << "h " << detail::render_monitoring(P.h) << "\n";
  os << "anchor";
  for (double v : R.anchor) os << " " << to_string(ExtReal(v));
  os << "\n";
  return os.str();
}

}  // namespace rocklab
