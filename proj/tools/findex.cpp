// findex: inspect conditional expectations on multi-matrix algebras.
//
// Subcommands: check, constants, index, tower, suite, gen.
// Exit codes: 0 all checks passed, 1 a check failed, 2 usage or input error.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "findex/suite.hpp"

using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw findex::Error("cannot open input file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw findex::Error("cannot open output file: " + out_path);
  out << text;
}

json number(double v) { return findex::format_decimal(v); }

json certificate_json(const findex::Certificate& c) {
  json j;
  j["value"] = number(c.value);
  j["method"] = findex::to_string(c.method);
  j["converged"] = c.converged;
  if (c.restarts_used > 0) j["restarts_used"] = c.restarts_used;
  j["residual"] = number(c.residual);
  return j;
}

findex::Scenario load_scenario(const std::string& input, double tol_override,
                               std::uint64_t seed, bool seed_set) {
  findex::Scenario sc = findex::parse_scenario(slurp(input));
  if (tol_override > 0.0) sc.tol.certificate = tol_override;
  if (seed_set) sc.seed = seed;
  return sc;
}

int run_check(const findex::Scenario& sc, const std::string& out) {
  findex::CondExp ce = findex::make_condexp(sc);
  findex::ValidationReport rep = findex::validate_ce(ce, sc.tol, sc.seed);
  json j;
  j["scenario"] = sc.name;
  j["ok"] = rep.ok;
  json cs = json::array();
  for (const auto& c : rep.checks) {
    json e;
    e["axiom"] = c.name;
    e["passed"] = c.passed;
    e["residual"] = number(c.residual);
    cs.push_back(std::move(e));
  }
  j["axioms"] = std::move(cs);
  emit(j.dump(2) + "\n", out);
  return rep.ok ? 0 : 1;
}

int run_constants(const findex::Scenario& sc, int restarts, const std::string& out) {
  findex::CondExp ce = findex::make_condexp(sc);
  findex::Certificate k = findex::compute_K(ce, sc.tol, restarts, sc.seed);
  findex::Certificate l = findex::compute_L(ce, sc.tol);
  json j;
  j["scenario"] = sc.name;
  j["K"] = certificate_json(k);
  j["L"] = certificate_json(l);
  emit(j.dump(2) + "\n", out);
  return (k.converged || k.is_infinite()) ? 0 : 1;
}

int run_index(const findex::Scenario& sc, const std::string& out) {
  findex::CondExp ce = findex::make_condexp(sc);
  json j;
  j["scenario"] = sc.name;
  try {
    findex::QuasiBasis qb = findex::quasi_basis(ce, sc.tol);
    findex::IndexElement ind = findex::index_element_from(ce, qb, sc.tol);
    j["finite"] = true;
    j["quasi_basis_size"] = static_cast<int>(qb.elements.size());
    j["reconstruction_residual"] = number(qb.reconstruction_residual);
    j["index_norm"] = number(ind.norm);
    j["index_min_eigenvalue"] = number(ind.min_eigenvalue);
    j["centrality_residual"] = number(ind.centrality_residual);
    json blocks = json::array();
    for (int b = 0; b < ind.value.num_blocks(); ++b) {
      double n = static_cast<double>(ind.value.block(b).rows());
      blocks.push_back(number(ind.value.block(b).trace().real() / n));
    }
    j["block_values"] = std::move(blocks);
    emit(j.dump(2) + "\n", out);
    return 0;
  } catch (const findex::Error& e) {
    j["finite"] = false;
    j["detail"] = e.what();
    emit(j.dump(2) + "\n", out);
    return 1;
  }
}

int run_tower(const findex::Scenario& sc, const std::string& out) {
  findex::CondExp ce = findex::make_condexp(sc);
  findex::Tower tower = findex::jones_tower(ce, sc.levels, sc.dim_budget, sc.tol);
  json j;
  j["scenario"] = sc.name;
  j["status"] = tower.status == findex::TowerStatus::complete ? "complete"
                                                              : "truncated";
  json ls = json::array();
  bool ok = true;
  for (const auto& lvl : tower.levels) {
    json e;
    e["algebra"] = lvl.expectation.amb_shape().str();
    e["subalgebra"] = lvl.expectation.sub_shape().str();
    e["index_norm"] = number(lvl.index.norm);
    e["index_min_eigenvalue"] = number(lvl.index.min_eigenvalue);
    if (lvl.stabilization_checked) {
      e["index_stabilized"] = lvl.stabilization_ok;
      ok = ok && lvl.stabilization_ok;
    }
    ls.push_back(std::move(e));
  }
  j["levels"] = std::move(ls);
  emit(j.dump(2) + "\n", out);
  return ok ? 0 : 1;
}

int run_suite(findex::Scenario sc, const std::string& checks_csv,
              const std::string& out) {
  if (!checks_csv.empty()) {
    sc.checks.clear();
    std::stringstream ss(checks_csv);
    std::string id;
    while (std::getline(ss, id, ',')) {
      const auto& ids = findex::known_checks();
      if (std::find(ids.begin(), ids.end(), id) == ids.end())
        throw findex::ParseError("unknown check id: " + id);
      sc.checks.push_back(id);
    }
  }
  findex::SuiteReport rep = findex::run_suite(sc);
  emit(rep.to_json(), out);
  return rep.passed ? 0 : 1;
}

int run_gen(std::uint64_t seed, int max_blocks, int max_block_dim,
            const std::string& out) {
  findex::Scenario sc = findex::random_scenario(seed, max_blocks, max_block_dim);
  emit(findex::serialize_scenario(sc), out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conditional expectations of finite index on multi-matrix algebras"};
  app.require_subcommand(1);

  std::string input, out, checks_csv;
  double tol = 0.0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int restarts = 64, levels = -1, dim_budget = -1;
  int max_blocks = 3, max_block_dim = 4;

  auto add_common = [&](CLI::App* cmd, bool needs_input) {
    if (needs_input)
      cmd->add_option("--input", input, "scenario JSON file")->required();
    cmd->add_option("--out", out, "write the JSON report here instead of stdout");
    cmd->add_option("--tol", tol, "override the certificate tolerance");
    cmd->add_option_function<std::uint64_t>(
        "--seed",
        [&](const std::uint64_t& s) {
          seed = s;
          seed_set = true;
        },
        "override the scenario seed");
  };

  CLI::App* c_check = app.add_subcommand("check", "validate the expectation axioms");
  add_common(c_check, true);
  CLI::App* c_const = app.add_subcommand("constants", "compute K and L with certificates");
  add_common(c_const, true);
  c_const->add_option("--restarts", restarts, "see-saw restarts for K");
  CLI::App* c_index = app.add_subcommand("index", "quasi-basis and index element");
  add_common(c_index, true);
  CLI::App* c_tower = app.add_subcommand("tower", "iterated basic construction");
  add_common(c_tower, true);
  c_tower->add_option("--levels", levels, "tower levels above the base");
  c_tower->add_option("--dim-budget", dim_budget, "linear dimension budget");
  CLI::App* c_suite = app.add_subcommand("suite", "run the scenario's checks");
  add_common(c_suite, true);
  c_suite->add_option("--checks", checks_csv, "comma-separated check ids");
  c_suite->add_option("--levels", levels, "tower levels above the base");
  c_suite->add_option("--dim-budget", dim_budget, "linear dimension budget");
  CLI::App* c_gen = app.add_subcommand("gen", "generate a random scenario");
  c_gen->add_option("--seed", seed, "generator seed")->required();
  c_gen->add_option("--out", out, "write the scenario here instead of stdout");
  c_gen->add_option("--max-blocks", max_blocks, "max blocks per algebra");
  c_gen->add_option("--max-block-dim", max_block_dim, "max subalgebra block size");

  CLI11_PARSE(app, argc, argv);

  try {
    if (c_gen->parsed()) return run_gen(seed, max_blocks, max_block_dim, out);
    findex::Scenario sc = load_scenario(input, tol, seed, seed_set);
    if (levels >= 0) sc.levels = levels;
    if (dim_budget > 0) sc.dim_budget = dim_budget;
    if (c_check->parsed()) return run_check(sc, out);
    if (c_const->parsed()) return run_constants(sc, restarts, out);
    if (c_index->parsed()) return run_index(sc, out);
    if (c_tower->parsed()) return run_tower(sc, out);
    if (c_suite->parsed()) return run_suite(sc, checks_csv, out);
  } catch (const findex::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const findex::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  std::cerr << "error: no subcommand\n";
  return 2;
}
