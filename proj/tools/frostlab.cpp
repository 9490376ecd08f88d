// Command-line front end. Talks to the library only through the C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "frostlab/frostlab_c.h"

using Json = nlohmann::json;

namespace {

struct Failure {
  int status;
};

void Check(int status) {
  if (status != FL_OK) throw Failure{status};
}

using MeasurePtr = std::unique_ptr<fl_measure, decltype(&fl_measure_free)>;

MeasurePtr Load(const std::string& path) {
  fl_measure* m = nullptr;
  Check(fl_measure_load(path.c_str(), &m));
  return MeasurePtr(m, fl_measure_free);
}

std::string Take(char* s) {
  std::string out = s ? s : "";
  fl_string_free(s);
  return out;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::fprintf(stderr, "frostlab: cannot read %s\n", path.c_str());
    throw Failure{FL_IO_ERROR};
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void Emit(const std::string& json, const std::string& out) {
  std::string text = Json::parse(json).dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::binary);
  f << text;
  if (!f) {
    std::fprintf(stderr, "frostlab: cannot write %s\n", out.c_str());
    throw Failure{FL_IO_ERROR};
  }
}

void WriteRaw(const std::string& text, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) {
    std::fprintf(stderr, "frostlab: cannot write %s\n", path.c_str());
    throw Failure{FL_IO_ERROR};
  }
}

// Merges --opts JSON text under the flags already collected.
std::string Merge(Json o, const std::string& extra) {
  if (!extra.empty()) {
    Json e = Json::parse(extra);
    for (auto& [k, v] : e.items()) o[k] = v;
  }
  return o.dump();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"frostlab: multiscale analysis of dyadic measures"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string out, extra;
  app.add_option("-o,--out", out, "write the JSON result here instead of stdout");
  app.add_option("--opts", extra, "extra options as a JSON object");

  // measure
  auto* measure = app.add_subcommand("measure", "inspect or generate measures");
  measure->require_subcommand(1);
  std::string mpath;
  auto* info = measure->add_subcommand("info", "dimension, depth and per-level counts");
  info->add_option("measure", mpath, "measure JSON")->required();
  std::string gname, gparams = "{}";
  auto* gen = measure->add_subcommand("generate", "run a generator");
  gen->add_option("name", gname, "generator name")->required();
  gen->add_option("--params", gparams, "generator parameters as JSON");

  // regularize
  int T = 2, ell = 0;
  double eps = 0.1;
  bool with_cells = false;
  auto* reg = app.add_subcommand("regularize", "split into regular pieces");
  reg->add_option("measure", mpath)->required();
  reg->add_option("--T", T, "block length");
  reg->add_option("--ell", ell, "number of blocks (default m/T)");
  reg->add_option("--eps", eps, "mass floor exponent");
  reg->add_flag("--cells", with_cells, "include piece supports");

  // lip decompose
  auto* lip = app.add_subcommand("lip", "Lipschitz function decompositions");
  lip->require_subcommand(1);
  std::string fpath, mode = "linear";
  int G = 1024, quantum = 1;
  unsigned long long seed = 1;
  bool monotone = false;
  double s_par = 0, t_par = 0;
  auto* lipd = lip->add_subcommand("decompose", "decompose a PL function");
  lipd->add_option("function", fpath, "PL function JSON (omit for a random one)");
  lipd->add_option("--mode", mode, "linear, graded, chain or superlinear");
  lipd->add_option("--eps", eps);
  lipd->add_option("--G", G, "grid size of the random function");
  lipd->add_option("--seed", seed);
  lipd->add_flag("--monotone", monotone);
  lipd->add_option("--s", s_par);
  lipd->add_option("--t", t_par);
  lipd->add_option("--quantum", quantum);

  // multiscale
  std::string msmode = "frostman";
  double u = 0.1;
  std::vector<double> sigma;
  auto* ms = app.add_subcommand("multiscale", "multiscale decomposition with verification");
  ms->add_option("measure", mpath)->required();
  ms->add_option("--T", T);
  ms->add_option("--mode", msmode, "frostman or ahlfors");
  ms->add_option("--u", u);
  ms->add_option("--eps", eps);
  ms->add_option("--sigma", sigma, "regularity exponents (else extracted)");

  // entropy-bound
  std::string map;
  auto* eb = app.add_subcommand("entropy-bound", "multiscale entropy bound for a map");
  eb->add_option("measure", mpath)->required();
  eb->add_option("--map", map, "proj:<angle>, dist:<y>, norm<p>:<y>, radial:<y>")->required();
  eb->add_option("--T", T);

  // project
  double angle = 0;
  int level = -1;
  auto* pr = app.add_subcommand("project", "projected measure");
  pr->add_option("measure", mpath)->required();
  pr->add_option("--angle", angle);
  pr->add_option("--level", level);

  // energy, kaufman, falconer
  double sig = 0.5, kappa = 0.9, C = 4.0;
  int dirs = 1024;
  std::vector<int> levels;
  auto* en = app.add_subcommand("energy", "Riesz energy");
  en->add_option("measure", mpath)->required();
  en->add_option("--sigma", sig);
  auto* ka = app.add_subcommand("kaufman", "projected energy inequality");
  ka->add_option("measure", mpath)->required();
  ka->add_option("--sigma", sig);
  ka->add_option("--kappa", kappa);
  ka->add_option("--C", C);
  ka->add_option("--directions", dirs);
  auto* fa = app.add_subcommand("falconer", "projected L2 against energy");
  fa->add_option("measure", mpath)->required();
  fa->add_option("--kappa", kappa);
  fa->add_option("--directions", dirs);
  fa->add_option("--levels", levels);

  // plates, radial
  double delta = 1.0 / 256, eta = 0.25, delta0 = 0.25;
  int depth = 2;
  std::string nupath;
  auto* pl = app.add_subcommand("plates", "heavy plate structure");
  pl->add_option("measure", mpath)->required();
  pl->add_option("--delta", delta);
  pl->add_option("--eta", eta);
  pl->add_option("--kappa", kappa);
  pl->add_option("--C", C);
  auto* ra = app.add_subcommand("radial", "radial pruning of mu against nu");
  ra->add_option("mu", mpath)->required();
  ra->add_option("nu", nupath)->required();
  ra->add_option("--delta0", delta0);
  ra->add_option("--eta", eta);
  ra->add_option("--depth", depth);

  // run, incidence, sweep, pinned
  std::string scenario;
  auto* run = app.add_subcommand("run", "full pipeline on a scenario file");
  run->add_option("scenario", scenario)->required();
  std::string request, family = "lines";
  int tt = 0;
  double ikappa = 0.1, ieps = 0.05;
  auto* inc = app.add_subcommand("incidence", "curve incidences and hypothesis audit");
  inc->add_option("request", request, "request JSON with E, A, delta");
  inc->add_option("--train-track", tt, "use the train track at depth m");
  inc->add_option("--family", family);
  inc->add_option("--kappa", ikappa);
  inc->add_option("--eps", ieps);
  int ndir = 256;
  bool random = false;
  std::string csv;
  auto* sw = app.add_subcommand("sweep", "projection counting exponents over directions");
  sw->add_option("measure", mpath)->required();
  sw->add_option("--directions", ndir);
  sw->add_flag("--random", random);
  sw->add_option("--seed", seed);
  sw->add_option("--level", level);
  sw->add_option("--csv", csv, "write the per-direction table here");
  int npins = 64;
  auto* pn = app.add_subcommand("pinned", "pinned distance counting exponents");
  pn->add_option("measure", mpath)->required();
  pn->add_option("--pins", npins);
  pn->add_option("--seed", seed);
  pn->add_option("--level", level);
  pn->add_option("--csv", csv);

  CLI11_PARSE(app, argc, argv);

  try {
    char* res = nullptr;
    auto lvl = [&](Json& o) {
      if (level >= 0) o["level"] = level;
    };
    if (measure->parsed()) {
      if (info->parsed()) {
        auto mu = Load(mpath);
        Check(fl_measure_info(mu.get(), &res));
      } else {
        fl_measure* m = nullptr;
        Check(fl_measure_generate(gname.c_str(), gparams.c_str(), &m));
        MeasurePtr mu(m, fl_measure_free);
        Check(fl_measure_to_json(mu.get(), &res));
      }
    } else if (reg->parsed()) {
      auto mu = Load(mpath);
      Json o = {{"T", T}, {"eps", eps}, {"with_cells", with_cells}};
      if (ell > 0) o["ell"] = ell;
      Check(fl_regularize(mu.get(), Merge(o, extra).c_str(), &res));
    } else if (lip->parsed()) {
      Json o = {{"mode", mode}, {"eps", eps}, {"quantum", quantum}};
      if (!fpath.empty())
        o["function"] = Json::parse(ReadFile(fpath));
      else
        o["random"] = {{"G", G}, {"seed", seed}, {"monotone", monotone}};
      if (mode == "superlinear") {
        o["s"] = s_par;
        o["t"] = t_par;
      }
      Check(fl_lip_decompose(Merge(o, extra).c_str(), &res));
    } else if (ms->parsed()) {
      auto mu = Load(mpath);
      Json o = {{"T", T}, {"mode", msmode}, {"u", u}};
      if (ms->count("--eps")) o["eps"] = eps;
      if (!sigma.empty()) o["sigma"] = sigma;
      Check(fl_multiscale(mu.get(), Merge(o, extra).c_str(), &res));
    } else if (eb->parsed()) {
      auto mu = Load(mpath);
      Check(fl_entropy_bound(mu.get(), Merge({{"map", map}, {"T", T}}, extra).c_str(), &res));
    } else if (pr->parsed()) {
      auto mu = Load(mpath);
      Json o = {{"angle", angle}};
      lvl(o);
      fl_measure* p = nullptr;
      Check(fl_project(mu.get(), Merge(o, extra).c_str(), &p));
      MeasurePtr pm(p, fl_measure_free);
      Check(fl_measure_to_json(pm.get(), &res));
    } else if (en->parsed()) {
      auto mu = Load(mpath);
      Check(fl_energy(mu.get(), Merge({{"sigma", sig}}, extra).c_str(), &res));
    } else if (ka->parsed()) {
      auto mu = Load(mpath);
      Json o = {{"sigma", sig}, {"kappa", kappa}, {"C", C}, {"directions", dirs}};
      Check(fl_kaufman(mu.get(), Merge(o, extra).c_str(), &res));
    } else if (fa->parsed()) {
      auto mu = Load(mpath);
      Json o = {{"kappa", kappa}};
      if (fa->count("--directions")) o["directions"] = dirs;
      if (!levels.empty()) o["levels"] = levels;
      Check(fl_falconer(mu.get(), Merge(o, extra).c_str(), &res));
    } else if (pl->parsed()) {
      auto mu = Load(mpath);
      Json o = {{"delta", delta}, {"eta", eta}, {"kappa", pl->count("--kappa") ? kappa : 0.5},
                {"C", C}};
      Check(fl_heavy_plates(mu.get(), Merge(o, extra).c_str(), &res));
    } else if (ra->parsed()) {
      auto mu = Load(mpath), nu = Load(nupath);
      Json o = {{"delta0", delta0}, {"eta", ra->count("--eta") ? eta : 0.2}, {"depth", depth}};
      Check(fl_radial(mu.get(), nu.get(), Merge(o, extra).c_str(), &res));
    } else if (run->parsed()) {
      Check(fl_run(ReadFile(scenario).c_str(), &res));
    } else if (inc->parsed()) {
      Json o = request.empty() ? Json::object() : Json::parse(ReadFile(request));
      if (tt > 0) o["train_track"] = tt;
      o["family"] = family;
      o["kappa"] = ikappa;
      o["eps"] = ieps;
      Check(fl_incidence(Merge(o, extra).c_str(), &res));
    } else if (sw->parsed()) {
      auto mu = Load(mpath);
      Json o = {{"directions", ndir}, {"random", random}, {"seed", seed}};
      lvl(o);
      char* table = nullptr;
      Check(fl_sweep(mu.get(), Merge(o, extra).c_str(), &res, &table));
      std::string t = Take(table);
      if (!csv.empty()) WriteRaw(t, csv);
    } else if (pn->parsed()) {
      auto mu = Load(mpath);
      Json o = {{"count", npins}, {"seed", seed}};
      lvl(o);
      char* table = nullptr;
      Check(fl_pinned(mu.get(), Merge(o, extra).c_str(), &res, &table));
      std::string t = Take(table);
      if (!csv.empty()) WriteRaw(t, csv);
    }
    Emit(Take(res), out);
  } catch (const Failure& f) {
    if (*fl_last_error()) std::fprintf(stderr, "frostlab: %s\n", fl_last_error());
    return f.status;
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "frostlab: bad JSON: %s\n", e.what());
    return FL_PARSE_ERROR;
  }
  return 0;
}
