#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rocklab/catalog.hpp"
#include "rocklab/cspp.hpp"
#include "rocklab/problem_io.hpp"

namespace rocklab {

namespace cli_detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

inline Vec parse_commas(const std::string& s) {
  Vec out;
  std::string tok;
  std::istringstream in(s);
  while (std::getline(in, tok, ',')) out.push_back(parse_ext_real(tok).value());
  return out;
}

inline nlohmann::json item_to_json(const CheckItem& it) {
  nlohmann::json j;
  j["label"] = it.label;
  j["measured"] = it.measured.is_finite() ? nlohmann::json(it.measured.value())
                                          : nlohmann::json(to_string(it.measured));
  j["expected"] = it.expected.is_finite() ? nlohmann::json(it.expected.value())
                                          : nlohmann::json(to_string(it.expected));
  j["tol"] = it.tol;
  j["pass"] = it.pass;
  j["note"] = it.note;
  return j;
}

inline void print_report(const VerificationReport& rep, bool as_json, std::ostream& os) {
  if (as_json) {
    nlohmann::json j;
    j["name"] = rep.name;
    j["pass"] = rep.pass();
    j["items"] = nlohmann::json::array();
    for (const auto& it : rep.items) j["items"].push_back(item_to_json(it));
    os << j.dump(2) << "\n";
    return;
  }
  for (const auto& it : rep.items) {
    os << (it.pass ? "PASS" : "FAIL") << " " << rep.name << ": " << it.label
       << " measured=" << to_string(it.measured) << " expected=" << to_string(it.expected)
       << " tol=" << to_string(ExtReal(it.tol)) << "\n";
  }
  os << (rep.pass() ? "PASS" : "FAIL") << " " << rep.name << "\n";
}

inline SolverCfg cfg_from_flags(std::size_t n, const std::string& box, std::size_t res, double eps) {
  SolverCfg cfg;
  Vec b = box.empty() ? Vec{} : parse_commas(box);
  if (b.empty()) {
    cfg.box_lo.assign(n, -10.0);
    cfg.box_hi.assign(n, 10.0);
  } else if (b.size() == 2) {
    cfg.box_lo.assign(n, b[0]);
    cfg.box_hi.assign(n, b[1]);
  } else if (b.size() == 2 * n) {
    for (std::size_t i = 0; i < n; ++i) {
      cfg.box_lo.push_back(b[2 * i]);
      cfg.box_hi.push_back(b[2 * i + 1]);
    }
  } else {
    throw std::runtime_error("--box needs 'lo,hi' or a lo,hi pair per dimension");
  }
  cfg.resolution = res;
  cfg.eps = eps;
  return cfg;
}

}  // namespace cli_detail

inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Perturbation analysis of composite optimization models"};
  app.require_subcommand(1);

  // example
  auto* ex = app.add_subcommand("example", "run a catalog entry against its oracles");
  std::string ex_name;
  bool ex_json = false;
  ex->add_option("name", ex_name, "catalog entry")->required();
  ex->add_flag("--json", ex_json, "machine-readable report");

  // sweep
  auto* sw = app.add_subcommand("sweep", "minimum-value sweep p(u) over a grid");
  std::string sw_problem, sw_from, sw_to, sw_out, sw_box;
  std::size_t sw_steps = 21, sw_res = 20001, sw_dim = 0;
  double sw_eps = 1e-9;
  sw->add_option("--problem", sw_problem, "problem file")->required();
  sw->add_option("--dim", sw_dim, "perturbation dimension (validated against the file)");
  sw->add_option("--from", sw_from, "comma list, lower grid corner")->required();
  sw->add_option("--to", sw_to, "comma list, upper grid corner")->required();
  sw->add_option("--steps", sw_steps, "grid points per dimension");
  sw->add_option("--out", sw_out, "CSV output file (stdout otherwise)");
  sw->add_option("--box", sw_box, "inner solver box: lo,hi (per dimension)");
  sw->add_option("--res", sw_res, "inner grid resolution");
  sw->add_option("--eps", sw_eps, "near-minimizer band");

  // check
  auto* ck = app.add_subcommand("check", "multiplier and qualification check at a point");
  std::string ck_problem, ck_point, ck_u;
  double ck_tol = 1e-6;
  ck->add_option("--problem", ck_problem, "problem file")->required();
  ck->add_option("--point", ck_point, "comma list x")->required();
  ck->add_option("--u", ck_u, "perturbation (defaults to the anchor)");
  ck->add_option("--tol", ck_tol, "residual tolerance");

  // dual
  auto* du = app.add_subcommand("dual", "projected supergradient ascent on the dual");
  std::string du_problem, du_y0, du_trace, du_box;
  std::size_t du_iters = 200, du_res = 20001;
  double du_t0 = 0.25;
  du->add_option("--problem", du_problem, "problem file")->required();
  du->add_option("--iters", du_iters, "iterations");
  du->add_option("--t0", du_t0, "diminishing step scale t0/(1+k)");
  du->add_option("--y0", du_y0, "starting multiplier, comma list");
  du->add_option("--box", du_box, "inner solver box: lo,hi");
  du->add_option("--res", du_res, "inner grid resolution");
  du->add_option("--trace", du_trace, "write the ascent trace CSV here");

  // cspp
  auto* cs = app.add_subcommand("cspp", "Lagrangian relaxation of a constrained shortest path");
  std::string cs_graph, cs_trace;
  std::size_t cs_iters = 200;
  double cs_t0 = 0.25;
  bool cs_enum = false;
  cs->add_option("--graph", cs_graph, "graph file")->required();
  cs->add_flag("--enumerate", cs_enum, "enumerate all simple s-t paths");
  cs->add_option("--iters", cs_iters, "ascent iterations");
  cs->add_option("--t0", cs_t0, "diminishing step scale");
  cs->add_option("--trace", cs_trace, "write the ascent trace CSV here");

  // selftest
  auto* st = app.add_subcommand("selftest", "run every catalog entry");
  bool st_json = false;
  st->add_flag("--json", st_json, "machine-readable report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*ex) {
      VerificationReport rep = run_example(ex_name);
      cli_detail::print_report(rep, ex_json, std::cout);
      return rep.pass() ? 0 : 1;
    }

    if (*sw) {
      Rockafellian R = parse_problem(cli_detail::read_file(sw_problem));
      if (sw_dim != 0 && sw_dim != R.problem.m())
        throw std::runtime_error("--dim does not match the problem's perturbation dimension");
      const Vec from = cli_detail::parse_commas(sw_from);
      const Vec to = cli_detail::parse_commas(sw_to);
      require_dim(from.size(), R.problem.m(), "sweep --from");
      require_dim(to.size(), R.problem.m(), "sweep --to");
      std::vector<Vec> grid;
      std::vector<std::size_t> idx(from.size(), 0);
      while (true) {
        Vec u(from.size());
        for (std::size_t j = 0; j < from.size(); ++j)
          u[j] = from[j] + (to[j] - from[j]) * static_cast<double>(idx[j]) /
                               static_cast<double>(std::max<std::size_t>(sw_steps - 1, 1));
        grid.push_back(u);
        std::size_t j = 0;
        while (j < idx.size()) {
          if (++idx[j] < sw_steps) break;
          idx[j] = 0;
          ++j;
        }
        if (j == idx.size()) break;
      }
      SolverCfg cfg = cli_detail::cfg_from_flags(R.problem.n(), sw_box, sw_res, sw_eps);
      MinValueCurve curve = pu_sweep(R, grid, cfg);
      const std::string csv = to_csv(curve);
      if (sw_out.empty())
        std::cout << csv;
      else
        cli_detail::write_file(sw_out, csv);
      return 0;
    }

    if (*ck) {
      Rockafellian R = parse_problem(cli_detail::read_file(ck_problem));
      const Vec x = cli_detail::parse_commas(ck_point);
      const Vec u = ck_u.empty() ? R.anchor : cli_detail::parse_commas(ck_u);
      MultiplierFinding f = composite_kkt(R, u, x, ck_tol);
      std::cout << to_kv(f);
      if (f.status != KktStatus::InfeasiblePoint) {
        QualificationResult q = qualification_check(R, u, x, ck_tol);
        std::cout << "qualified=" << (q.qualified ? "true" : "false") << "\n";
        if (!q.qualified) {
          std::cout << "witness=";
          for (std::size_t i = 0; i < q.witness.size(); ++i)
            std::cout << (i ? "," : "") << to_string(ExtReal(q.witness[i]));
          std::cout << "\n";
        }
      }
      return f.status == KktStatus::MultiplierFound ? 0 : 1;
    }

    if (*du) {
      Rockafellian R = parse_problem(cli_detail::read_file(du_problem));
      const bool indicator_h = !real_valued(R.problem.h);
      LagrangianForm L = indicator_h ? LagrangianForm::eq_ineq(R) : LagrangianForm::conjugate_form(R);
      DualEvalCfg dcfg;
      dcfg.inner = cli_detail::cfg_from_flags(R.problem.n(), du_box, du_res, 1e-9);
      AscentProblem ap = ascent_problem(L, dcfg);
      Vec y0 = du_y0.empty() ? Vec(R.problem.m(), 0.0) : cli_detail::parse_commas(du_y0);
      DualState state = dual_ascent(ap, y0, StepRule::diminishing(du_t0), du_iters);
      std::cout << "best_bound=" << to_string(state.best_bound) << "\n";
      std::cout << "iterations=" << state.iterations << "\n";
      if (state.halted) std::cout << "halted=" << state.halt_reason << "\n";
      std::cout << "y=";
      for (std::size_t i = 0; i < state.y.size(); ++i)
        std::cout << (i ? "," : "") << to_string(ExtReal(state.y[i]));
      std::cout << "\n";
      if (!du_trace.empty()) cli_detail::write_file(du_trace, to_csv(state));
      return state.halted && state.best_bound.is_neg_inf() ? 1 : 0;
    }

    if (*cs) {
      WeightedGraph G = parse_graph(cli_detail::read_file(cs_graph));
      if (cs_enum) {
        auto paths = enumerate_paths(G);
        for (const auto& p : paths) {
          std::cout << "path";
          for (int v : p.vertex_seq) std::cout << " " << (v + 1);
          std::cout << " length=" << to_string(ExtReal(p.length)) << " weights=";
          for (std::size_t k = 0; k < p.weights.size(); ++k)
            std::cout << (k ? "," : "") << to_string(ExtReal(p.weights[k]));
          std::cout << (p.feasible ? " feasible" : " infeasible") << "\n";
        }
        auto best = constrained_optimum(paths);
        std::cout << "optimum=" << (best ? to_string(ExtReal(best->length)) : "inf") << "\n";
      }
      CsppRelaxCfg cfg;
      cfg.iters = cs_iters;
      cfg.rule = StepRule::diminishing(cs_t0);
      CsppRelaxResult r = cspp_relax(G, cfg);
      std::cout << "bound=" << to_string(r.best_bound) << "\n";
      if (r.best_feasible) {
        std::cout << "best_feasible_length=" << to_string(ExtReal(r.best_feasible->length)) << "\nbest_path";
        for (int v : r.best_feasible->vertex_seq) std::cout << " " << (v + 1);
        std::cout << "\n";
      } else {
        std::cout << "best_feasible_length=inf\nno_feasible_path=true\n";
      }
      std::cout << "gap=" << to_string(r.gap.gap) << "\n";
      if (!cs_trace.empty()) cli_detail::write_file(cs_trace, to_csv(r.state));
      return 0;
    }

    if (*st) {
      bool all = true;
      nlohmann::json out = nlohmann::json::array();
      for (const auto& e : catalog()) {
        VerificationReport rep = e.run();
        all = all && rep.pass();
        if (st_json) {
          nlohmann::json j;
          j["name"] = rep.name;
          j["pass"] = rep.pass();
          j["items"] = nlohmann::json::array();
          for (const auto& it : rep.items) j["items"].push_back(cli_detail::item_to_json(it));
          out.push_back(j);
        } else {
          std::cout << (rep.pass() ? "PASS " : "FAIL ") << rep.name << " (" << rep.items.size()
                    << " checks)\n";
          for (const auto& it : rep.items)
            if (!it.pass)
              std::cout << "  FAIL " << it.label << " measured=" << to_string(it.measured)
                        << " expected=" << to_string(it.expected) << "\n";
        }
      }
      if (st_json) std::cout << out.dump(2) << "\n";
      return all ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace rocklab
