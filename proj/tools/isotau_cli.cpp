#include "scenario_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

using namespace isotau;

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

struct Grid {
  double lo, hi, step;
};

Grid parse_grid(const std::string& g) {
  auto eq = g.find('=');
  if (eq == std::string::npos || g.substr(0, eq) != "t") throw config_error("grid must look like t=lo:hi:step");
  std::string rest = g.substr(eq + 1);
  auto c1 = rest.find(':'), c2 = rest.rfind(':');
  if (c1 == std::string::npos || c1 == c2) throw config_error("grid must look like t=lo:hi:step");
  Grid r;
  try {
    r.lo = std::stod(rest.substr(0, c1));
    r.hi = std::stod(rest.substr(c1 + 1, c2 - c1 - 1));
    r.step = std::stod(rest.substr(c2 + 1));
  } catch (const std::exception&) {
    throw config_error("grid bounds must be numbers");
  }
  if (!(r.step > 0) || !(r.hi >= r.lo)) throw config_error("grid needs step > 0 and hi >= lo");
  return r;
}

int loop_index(const std::string& s) {
  if (s == "inf") return 0;
  if (s == "1" || s == "2" || s == "3") return s[0] - '0';
  throw config_error("loop must be one of 1, 2, 3, inf");
}

void print_matrix(const Mat2& m) {
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) std::cout << (j ? "  " : "") << fmt17(m(i, j).real()) << " " << fmt17(m(i, j).imag());
    std::cout << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"isotau: isomonodromic tau function verification"};
  app.require_subcommand(1);

  std::string scenario_path, out_path, checks_arg, grid_arg = "t=0:0.5:0.01", loop_arg;
  double tol_scale = 1.0;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool theory = false;

  auto* verify = app.add_subcommand("verify", "run checks and write a JSON report");
  verify->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  verify->add_option("--checks", checks_arg, "comma separated check names");
  verify->add_option("--tol-scale", tol_scale, "multiply every tolerance")->check(CLI::PositiveNumber);
  auto* seed_opt = verify->add_option("--seed", seed, "override the scenario seed");
  verify->add_option("--jobs", jobs, "worker threads")->check(CLI::Range(1, 256));
  verify->add_option("--out", out_path, "report path")->required();

  auto* tau = app.add_subcommand("tau", "log tau and H_t along a real t grid (CSV)");
  tau->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  tau->add_option("--grid", grid_arg, "t=lo:hi:step");
  tau->add_option("--out", out_path, "CSV path, stdout if omitted");

  auto* mono = app.add_subcommand("monodromy", "continue Y around one loop and print the matrix");
  mono->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  mono->add_option("--loop", loop_arg, "1, 2, 3 or inf")->required();
  mono->add_flag("--theory", theory, "also print the closed-form matrix and the difference");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    Scenario s = io::load_scenario(scenario_path);

    if (*verify) {
      RunOptions opt;
      opt.checks = split_list(checks_arg);
      opt.tol_scale = tol_scale;
      if (*seed_opt) opt.seed = seed;
      opt.jobs = jobs;
      select_checks(opt.checks.empty() ? s.checks : opt.checks);
      Report rep = run_checks(s, opt);
      auto j = io::report_to_json(s, rep, opt.seed.value_or(s.seed), tol_scale);
      std::ofstream out(out_path);
      if (!out) throw config_error("cannot write report: " + out_path);
      out << j.dump(2) << "\n";
      for (const auto& r : rep.records)
        std::printf("%-22s %-12s %.3e (tol %.1e)\n", r.name.c_str(), status_name(r.status), r.residual, r.tolerance);
      std::printf("overall: %s\n", status_name(rep.overall));
      return rep.overall == Status::fail ? 1 : 0;
    }

    if (*tau) {
      Grid g = parse_grid(grid_arg);
      DeformationParams P = scenario_params(s);
      std::ofstream file;
      if (!out_path.empty()) {
        file.open(out_path);
        if (!file) throw config_error("cannot write CSV: " + out_path);
      }
      std::ostream& os = out_path.empty() ? std::cout : file;
      os << "t,re_log_tau,im_log_tau,re_H_t,im_H_t\n";
      int n = int(std::floor((g.hi - g.lo) / g.step + 1e-9));
      std::optional<DeformationParams> prev;
      cplx lt = 0;
      for (int k = 0; k <= n; ++k) {
        double t = g.lo + k * g.step;
        auto Q = shifted(P, 0, cplx(t) - P.t);
        // continue log tau along the grid so the branch does not jump
        lt = prev ? lt + log_tau_diff(Q, *prev) : log_tau(Q);
        cplx H = H_t(Q);
        os << fmt17(t) << "," << fmt17(lt.real()) << "," << fmt17(lt.imag()) << "," << fmt17(H.real()) << ","
           << fmt17(H.imag()) << "\n";
        prev = Q;
      }
      return 0;
    }

    if (*mono) {
      int loop = loop_index(loop_arg);
      DeformationParams P = scenario_params(s);
      Mat2 M = continue_monodromy(P, loop);
      print_matrix(M);
      if (theory) {
        Mat2 T = theoretical_monodromy(P).M[loop];
        std::cout << "theory\n";
        print_matrix(T);
        std::cout << "max difference " << fmt17(maxabs(M - T)) << "\n";
      }
      return 0;
    }
  } catch (const config_error& ex) {
    std::cerr << "configuration error: " << ex.what() << "\n";
    return 2;
  } catch (const geometry_error& ex) {
    std::cerr << "configuration error: " << ex.what() << "\n";
    return 2;
  } catch (const degenerate_error& ex) {
    std::cerr << "configuration error: " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
  return 0;
}
