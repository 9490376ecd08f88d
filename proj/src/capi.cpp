#include "frostlab/frostlab_c.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <numbers>
#include <string>

#include "frostlab/io.hpp"

using namespace frostlab;

struct fl_measure {
  DyadicMeasure mu;
};

static_assert(static_cast<int>(ErrorCode::kInternal) == FL_INTERNAL);
static_assert(static_cast<int>(ErrorCode::kNonConcentrationFailed) ==
              FL_NON_CONCENTRATION_FAILED);
static_assert(static_cast<int>(ErrorCode::kUnknownGenerator) == FL_UNKNOWN_GENERATOR);

namespace {

thread_local std::string g_last_error;

template <class Fn>
int Guard(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return FL_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<int>(e.code());
  } catch (const nlohmann::json::exception& e) {
    g_last_error = std::string("ParseError: ") + e.what();
    return FL_PARSE_ERROR;
  } catch (const std::exception& e) {
    g_last_error = std::string("Internal: ") + e.what();
    return FL_INTERNAL;
  }
}

char* Dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) Fail(ErrorCode::kInternal, "out of memory");
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

void Put(char** out, const Json& j) {
  Require(out != nullptr, ErrorCode::kInvalidArgument, "null output pointer");
  *out = Dup(j.dump());
}

Json Opts(const char* s) {
  if (s == nullptr || *s == 0) return Json::object();
  Json j = ParseJson(s);
  Require(j.is_object(), ErrorCode::kParseError, "options must be a JSON object");
  return j;
}

const DyadicMeasure& M(const fl_measure* h) {
  Require(h != nullptr, ErrorCode::kInvalidArgument, "null measure handle");
  return h->mu;
}

void PutMeasure(fl_measure** out, DyadicMeasure mu) {
  Require(out != nullptr, ErrorCode::kInvalidArgument, "null output pointer");
  *out = new fl_measure{std::move(mu)};
}

template <class V>
V Get(const Json& j, const char* key, V def) {
  return j.contains(key) ? j.at(key).get<V>() : def;
}

template <class V>
V Need(const Json& j, const char* key) {
  Require(j.contains(key), ErrorCode::kInvalidArgument, std::string("missing option ") + key);
  return j.at(key).get<V>();
}

int BlockT(const Json& o, const DyadicMeasure& mu) {
  const int T = Get(o, "T", 2);
  Require(T >= 1 && mu.depth() % T == 0, ErrorCode::kDepthMismatch,
          "depth " + std::to_string(mu.depth()) + " is not a multiple of T");
  return T;
}

SphereMeasure Directions(int d, int n) {
  Require(n >= 1, ErrorCode::kInvalidArgument, "directions must be positive");
  if (d == 2) return UniformCircle(n);
  if (d == 3) return FibonacciSphere(n);
  Fail(ErrorCode::kInvalidArgument, "direction sets exist for d in {2,3}");
}

std::vector<Point2> Points(const Json& a) {
  std::vector<Point2> out;
  for (const auto& p : a) {
    Require(p.is_array() && p.size() == 2, ErrorCode::kParseError, "points are [x, y] pairs");
    out.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return out;
}

}  // namespace

extern "C" {

const char* fl_version(void) { return "0.1.0"; }

const char* fl_status_name(int status) {
  if (status < 0 || status > FL_INTERNAL) return "Unknown";
  return ErrorName(static_cast<ErrorCode>(status));
}

const char* fl_last_error(void) { return g_last_error.c_str(); }

void fl_string_free(char* s) { std::free(s); }

int fl_measure_parse(const char* json, fl_measure** out) {
  return Guard([&] {
    Require(json != nullptr, ErrorCode::kInvalidArgument, "null JSON");
    PutMeasure(out, MeasureFromJson(ParseJson(json)));
  });
}

int fl_measure_load(const char* path, fl_measure** out) {
  return Guard([&] {
    Require(path != nullptr, ErrorCode::kInvalidArgument, "null path");
    PutMeasure(out, MeasureFromJson(ParseJson(ReadTextFile(path))));
  });
}

int fl_measure_generate(const char* name, const char* params, fl_measure** out) {
  return Guard([&] {
    Require(name != nullptr, ErrorCode::kInvalidArgument, "null generator name");
    PutMeasure(out, Generate(name, Opts(params)));
  });
}

int fl_measure_to_json(const fl_measure* mu, char** out) {
  return Guard([&] { Put(out, MeasureToJson(M(mu))); });
}

int fl_measure_info(const fl_measure* h, char** out) {
  return Guard([&] {
    const DyadicMeasure& mu = M(h);
    Json counts = Json::array(), ent = Json::array();
    for (int j = 0; j <= mu.depth(); ++j) {
      counts.push_back(mu.count_cubes(j));
      ent.push_back(Entropy(mu, j));
    }
    Put(out, {{"d", mu.dim()},
              {"m", mu.depth()},
              {"cells", mu.size()},
              {"total", mu.total()},
              {"count_by_level", counts},
              {"entropy_by_level", ent}});
  });
}

void fl_measure_free(fl_measure* mu) { delete mu; }

int fl_regularize(const fl_measure* h, const char* opts, char** out) {
  return Guard([&] {
    const DyadicMeasure& mu = M(h);
    Json o = Opts(opts);
    const int T = BlockT(o, mu);
    const int ell = Get(o, "ell", mu.depth() / T);
    ExtractOptions eo{Get(o, "classes_per_bit", 1)};
    auto dec = DecomposeRegular(mu.normalized(), T, ell, Get(o, "eps", 0.1), eo);
    Put(out, ToJson(dec, Get(o, "with_cells", false)));
  });
}

int fl_lip_decompose(const char* request, char** out) {
  return Guard([&] {
    Json o = Opts(request);
    PLFunction f;
    if (o.contains("function")) {
      f = PLFunctionFromJson(o["function"]);
    } else {
      Json r = Get(o, "random", Json::object());
      f = RandomZigZag(Get(r, "G", 1024), Get<std::uint64_t>(r, "seed", 1),
                       Get(r, "monotone", false));
    }
    const std::string mode = Get<std::string>(o, "mode", "linear");
    const double eps = Get(o, "eps", 0.1);
    Json res;
    if (mode == "linear") {
      res = ToJson(CoverByLinear(f, 0, f.grid(), eps));
    } else if (mode == "graded") {
      res = ToJson(CoverByLinearGraded(f, 0, f.grid(), eps, Get(o, "quantum", 1)));
    } else if (mode == "chain") {
      res = ToJson(SuperlinearChain(f, 0, f.grid(), eps));
    } else if (mode == "superlinear") {
      SuperlinearOptions so{Get(o, "quantum", 1)};
      res = ToJson(SuperlinearDecomposition(f, Need<double>(o, "s"), Need<double>(o, "t"),
                                            eps, so));
    } else {
      Fail(ErrorCode::kInvalidArgument, "unknown mode '" + mode + "'");
    }
    res["function"] = {{"a", f.a()}, {"b", f.b()}, {"G", f.grid()}};
    Put(out, res);
  });
}

int fl_multiscale(const fl_measure* h, const char* opts, char** out) {
  return Guard([&] {
    const DyadicMeasure& mu = M(h);
    Json o = Opts(opts);
    const int T = BlockT(o, mu);
    RegularPiece piece;
    Json extra = Json::object();
    if (o.contains("sigma")) {
      piece = MakeRegularPiece(mu.normalized(), o["sigma"].get<std::vector<double>>(), T);
    } else {
      piece = ExtractRegularSubset(mu.normalized(), T, mu.depth() / T);
      extra = {{"extracted_mass", piece.mass}, {"sigma", piece.sigma}};
    }
    VerifyOptions vo{Get<std::size_t>(o, "max_cubes", 256),
                     Get<std::size_t>(o, "max_centers", 64)};
    const std::string mode = Get<std::string>(o, "mode", "frostman");
    const double eps = Get(o, "eps", std::max(2.0, 4.0 / T));
    MultiscaleResult r;
    if (mode == "frostman")
      r = FrostmanMultiscale(piece, Get(o, "u", 0.1), eps, vo);
    else if (mode == "ahlfors")
      r = AhlforsMultiscale(piece, eps, vo);
    else
      Fail(ErrorCode::kInvalidArgument, "unknown mode '" + mode + "'");
    Json j = ToJson(r);
    j["piece"] = extra;
    Put(out, j);
  });
}

int fl_entropy_bound(const fl_measure* h, const char* opts, char** out) {
  return Guard([&] {
    const DyadicMeasure& mu = M(h);
    Json o = Opts(opts);
    MapPtr F = ParseMap(Need<std::string>(o, "map"), mu.dim());
    LevelIntervals iv;
    if (o.contains("intervals")) {
      for (const auto& p : o["intervals"]) iv.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    } else {
      const int T = BlockT(o, mu);
      for (int j = 0; j + T <= mu.depth(); j += T) iv.emplace_back(j, j + T);
    }
    Put(out, ToJson(MultiscaleEntropyBound(mu.normalized(), *F, iv)));
  });
}

int fl_project(const fl_measure* h, const char* opts, fl_measure** out) {
  return Guard([&] {
    const DyadicMeasure& mu = M(h);
    Json o = Opts(opts);
    std::vector<double> theta;
    if (o.contains("theta")) {
      theta = o["theta"].get<std::vector<double>>();
    } else {
      Require(mu.dim() == 2, ErrorCode::kInvalidArgument, "angle needs d = 2; pass theta");
      const double a = Get(o, "angle", 0.0);
      theta = {std::cos(a), std::sin(a)};
    }
    PutMeasure(out, Project(mu, theta, Get(o, "level", mu.depth())));
  });
}

int fl_energy(const fl_measure* h, const char* opts, char** out) {
  return Guard([&] {
    Json o = Opts(opts);
    Put(out, ToJson(EnergyOf(M(h), Need<double>(o, "sigma"),
                             Get<std::size_t>(o, "exact_limit", 20000))));
  });
}

int fl_kaufman(const fl_measure* h, const char* opts, char** out) {
  return Guard([&] {
    const DyadicMeasure& mu = M(h);
    Json o = Opts(opts);
    SphereMeasure rho = Directions(mu.dim(), Get(o, "directions", 1024));
    Put(out, ToJson(KaufmanCheck(mu.normalized(), rho, Need<double>(o, "sigma"),
                                 Get(o, "kappa", 0.9), Get(o, "C", 4.0), Get(o, "tol", 1e-2))));
  });
}

int fl_falconer(const fl_measure* h, const char* opts, char** out) {
  return Guard([&] {
    const DyadicMeasure& mu = M(h);
    Json o = Opts(opts);
    SphereMeasure rho = Directions(mu.dim(), Get(o, "directions", 4096));
    std::vector<int> levels = Get(o, "levels", std::vector<int>{mu.depth()});
    Put(out, ToJson(FalconerCheck(mu.normalized(), rho, Get(o, "kappa", 0.9), levels,
                                  Get<std::size_t>(o, "exact_limit", 20000))));
  });
}

int fl_heavy_plates(const fl_measure* h, const char* opts, char** out) {
  return Guard([&] {
    Json o = Opts(opts);
    Put(out, ToJson(HeavyPlateStructure(M(h).normalized(), Need<double>(o, "delta"),
                                        Get(o, "eta", 0.25), Get(o, "kappa", 0.5),
                                        Get(o, "C", 4.0))));
  });
}

int fl_radial(const fl_measure* mu, const fl_measure* nu, const char* opts, char** out) {
  return Guard([&] {
    Json o = Opts(opts);
    RadialOptions ro;
    ro.kappa = Get(o, "kappa", ro.kappa);
    ro.max_centers = Get(o, "max_centers", ro.max_centers);
    Put(out, ToJson(RadialPrune(M(mu).normalized(), M(nu).normalized(),
                                Get(o, "delta0", 0.25), Get(o, "eta", 0.2),
                                Get(o, "depth", 2), ro)));
  });
}

int fl_incidence(const char* request, char** out) {
  return Guard([&] {
    Json o = Opts(request);
    std::vector<Point2> E, A;
    std::vector<double> X;
    double delta;
    if (o.contains("train_track")) {
      TrainTrack tt = MakeTrainTrack(o["train_track"].get<int>(), Get(o, "rows", 0));
      E = tt.E;
      A = tt.A;
      X = tt.X;
      delta = tt.delta;
    } else {
      E = Points(Need<Json>(o, "E"));
      A = Points(Need<Json>(o, "A"));
      delta = Need<double>(o, "delta");
      if (o.contains("X")) {
        X = o["X"].get<std::vector<double>>();
      } else {
        for (const auto& p : E) X.push_back(p[0]);
      }
    }
    CurveFamily fam = FamilyByName(Get<std::string>(o, "family", "lines"));
    Json res = {{"incidence", ToJson(IncidenceCount(E, A, fam, delta))}};
    if (!A.empty()) res["family"] = ToJson(SampleBounds(fam, A));
    if (Get(o, "audit", true))
      res["audit"] = ToJson(NonconcentrationAudit(E, A, X, delta, Get(o, "kappa", 0.1),
                                                  Get(o, "eps", 0.05)));
    Put(out, res);
  });
}

int fl_sweep(const fl_measure* h, const char* opts, char** out, char** csv) {
  return Guard([&] {
    const DyadicMeasure& mu = M(h);
    Json o = Opts(opts);
    auto angles = SweepAngles(Get<std::size_t>(o, "directions", 256), Get(o, "random", false),
                              Get<std::uint64_t>(o, "seed", 1));
    Sweep s = ProjectionGainSweep(mu.support(), angles, Get(o, "level", mu.depth()));
    Put(out, ToJson(s));
    if (csv) *csv = Dup(s.csv());
  });
}

int fl_pinned(const fl_measure* h, const char* opts, char** out, char** csv) {
  return Guard([&] {
    const DyadicMeasure& mu = M(h);
    Json o = Opts(opts);
    std::vector<Point2> pins;
    if (o.contains("pins"))
      pins = Points(o["pins"]);
    else
      pins = RandomPins(Get<std::size_t>(o, "count", 64), Get<std::uint64_t>(o, "seed", 1),
                        Get(o, "lo", -1.0), Get(o, "hi", 2.0));
    PinSweep s = PinnedDistanceExperiment(mu.support(), pins, Get(o, "level", mu.depth()));
    Put(out, ToJson(s));
    if (csv) *csv = Dup(s.csv());
  });
}

int fl_run(const char* scenario, char** out) {
  return Guard([&] {
    Require(scenario != nullptr, ErrorCode::kInvalidArgument, "null scenario");
    Put(out, PipelineRun(ParseJson(scenario)).to_json());
  });
}

}  // extern "C"
