#include "ordvi/cli.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ordvi/evaluation.hpp"
#include "ordvi/symmetry.hpp"

namespace ordvi {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::size_t toCount(std::string_view key, std::string_view v) {
  std::size_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw UsageError("config key '" + std::string(key) + "' expects a nonnegative integer, got '" + std::string(v) + "'");
  }
  return out;
}

double toReal(std::string_view key, std::string_view v) {
  std::string s(v);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) {
    throw UsageError("config key '" + std::string(key) + "' expects a number, got '" + s + "'");
  }
  return out;
}

bool toBool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw UsageError("config key '" + std::string(key) + "' expects true or false, got '" + std::string(v) + "'");
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Key {
  Setter set;
  Getter get;
};

template <typename T>
std::string show(const T& v) {
  std::ostringstream o;
  o << v;
  return o.str();
}

const std::map<std::string, Key, std::less<>>& configKeys() {
  static const std::map<std::string, Key, std::less<>> keys = [] {
    std::map<std::string, Key, std::less<>> k;
    auto count = [&](const char* name, auto member) {
      k[name] = {[member](RunConfig& c, std::string_view key, std::string_view v) { member(c) = toCount(key, v); },
                 [member](const RunConfig& c) { return show(member(const_cast<RunConfig&>(c))); }};
    };
    auto real = [&](const char* name, auto member) {
      k[name] = {[member](RunConfig& c, std::string_view key, std::string_view v) { member(c) = toReal(key, v); },
                 [member](const RunConfig& c) { return show(member(const_cast<RunConfig&>(c))); }};
    };
    auto text = [&](const char* name, auto member) {
      k[name] = {[member](RunConfig& c, std::string_view, std::string_view v) { member(c) = std::string(v); },
                 [member](const RunConfig& c) { return member(const_cast<RunConfig&>(c)); }};
    };
    k["model"] = {[](RunConfig& c, std::string_view, std::string_view v) {
                    try {
                      c.model = parseModelKind(v);
                    } catch (const InputError& e) {
                      throw UsageError(e.what());
                    }
                  },
                  [](const RunConfig& c) { return std::string(toString(c.model)); }};
    // maxNodes and fixedLength apply to whichever model is selected
    k["maxNodes"] = {[](RunConfig& c, std::string_view key, std::string_view v) {
                       c.adjacency.maxNodes = c.sequence.maxNodes = toCount(key, v);
                     },
                     [](const RunConfig& c) { return show(c.maxNodes()); }};
    k["fixedLength"] = {[](RunConfig& c, std::string_view key, std::string_view v) {
                          c.adjacency.fixedLength = c.sequence.fixedLength = toCount(key, v);
                        },
                        [](const RunConfig& c) { return show(c.adjacency.fixedLength); }};
    count("stateSize", [](RunConfig& c) -> std::size_t& { return c.adjacency.stateSize; });
    count("embedSize", [](RunConfig& c) -> std::size_t& { return c.adjacency.embedSize; });
    count("nodeSize", [](RunConfig& c) -> std::size_t& { return c.sequence.nodeSize; });
    count("rounds", [](RunConfig& c) -> std::size_t& { return c.sequence.rounds; });
    k["posterior"] = {[](RunConfig& c, std::string_view, std::string_view v) {
                        if (v == "learned") c.learnedPosterior = true;
                        else if (v == "uniform") c.learnedPosterior = false;
                        else throw UsageError("posterior must be learned or uniform, got '" + std::string(v) + "'");
                        c.train.trainPosterior = c.learnedPosterior;
                      },
                      [](const RunConfig& c) { return std::string(c.learnedPosterior ? "learned" : "uniform"); }};
    count("posteriorLayers", [](RunConfig& c) -> std::size_t& { return c.posterior.layers; });
    count("posteriorHeads", [](RunConfig& c) -> std::size_t& { return c.posterior.heads; });
    count("posteriorHeadWidth", [](RunConfig& c) -> std::size_t& { return c.posterior.headWidth; });
    count("samples", [](RunConfig& c) -> std::size_t& { return c.train.samples; });
    k["multiplicity"] = {[](RunConfig& c, std::string_view, std::string_view v) {
                           try {
                             c.train.multiplicity = parseMultiplicityMode(v);
                           } catch (const InputError& e) {
                             throw UsageError(e.what());
                           }
                         },
                         [](const RunConfig& c) { return std::string(toString(c.train.multiplicity)); }};
    real("lrTheta", [](RunConfig& c) -> double& { return c.train.lrTheta; });
    real("lrPhi", [](RunConfig& c) -> double& { return c.train.lrPhi; });
    count("epochs", [](RunConfig& c) -> std::size_t& { return c.train.epochs; });
    k["seed"] = {[](RunConfig& c, std::string_view key, std::string_view v) { c.train.seed = toCount(key, v); },
                 [](const RunConfig& c) { return show(c.train.seed); }};
    k["baseline"] = {[](RunConfig& c, std::string_view key, std::string_view v) { c.train.baseline = toBool(key, v); },
                     [](const RunConfig& c) { return std::string(c.train.baseline ? "true" : "false"); }};
    real("baselineDecay", [](RunConfig& c) -> double& { return c.train.baselineDecay; });
    count("batchGraphs", [](RunConfig& c) -> std::size_t& { return c.train.batchGraphs; });
    count("threads", [](RunConfig& c) -> std::size_t& { return c.train.threads; });
    text("data", [](RunConfig& c) -> std::string& { return c.data; });
    text("generator", [](RunConfig& c) -> std::string& { return c.generator; });
    count("count", [](RunConfig& c) -> std::size_t& { return c.community.count; });
    count("genMinNodes", [](RunConfig& c) -> std::size_t& { return c.community.minNodes; });
    count("genMaxNodes", [](RunConfig& c) -> std::size_t& { return c.community.maxNodes; });
    real("pIntra", [](RunConfig& c) -> double& { return c.community.pIntra; });
    count("erNodes", [](RunConfig& c) -> std::size_t& { return c.erNodes; });
    real("erP", [](RunConfig& c) -> double& { return c.erP; });
    real("trainFraction", [](RunConfig& c) -> double& { return c.trainFraction; });
    text("outDir", [](RunConfig& c) -> std::string& { return c.outDir; });
    count("checkpointEvery", [](RunConfig& c) -> std::size_t& { return c.checkpointEvery; });
    return k;
  }();
  return keys;
}

}  // namespace

void setConfigValue(RunConfig& cfg, std::string_view key, std::string_view value) {
  const auto& keys = configKeys();
  auto it = keys.find(key);
  if (it == keys.end()) throw UsageError("unknown config key '" + std::string(key) + "'");
  it->second.set(cfg, key, value);
}

RunConfig parseRunConfig(std::string_view text, RunConfig base) {
  std::size_t lineNo = 0, pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineNo;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::string t = trim(line);
    if (t.empty()) continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) throw UsageError("config line " + std::to_string(lineNo) + ": expected key = value");
    std::string key = trim(std::string_view(t).substr(0, eq));
    std::string value = trim(std::string_view(t).substr(eq + 1));
    try {
      setConfigValue(base, key, value);
    } catch (const UsageError& e) {
      throw UsageError("config line " + std::to_string(lineNo) + ": " + e.what());
    }
  }
  return base;
}

void validateRunConfig(const RunConfig& c) {
  try {
    c.train.validate();
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  auto need = [](bool ok, const std::string& msg) {
    if (!ok) throw UsageError(msg);
  };
  need(c.maxNodes() >= 2, "maxNodes must be >= 2");
  need(c.adjacency.fixedLength <= c.maxNodes(), "fixedLength exceeds maxNodes");
  need(c.adjacency.stateSize > 0 && c.adjacency.embedSize > 0 && c.sequence.nodeSize > 0, "hidden sizes must be > 0");
  need(c.posterior.heads > 0 && c.posterior.headWidth > 0, "posterior heads and headWidth must be > 0");
  need(c.data.empty() != c.generator.empty(), "exactly one of data or generator must be set");
  if (!c.generator.empty()) {
    need(c.generator == "community" || c.generator == "er", "generator must be community or er");
    need(c.community.count > 0, "count must be > 0");
    if (c.generator == "community") {
      need(c.community.minNodes >= 4 && c.community.minNodes <= c.community.maxNodes,
           "community sizes need 4 <= genMinNodes <= genMaxNodes");
      need(c.community.maxNodes <= c.maxNodes(), "genMaxNodes exceeds the model's maxNodes");
      need(c.community.pIntra >= 0.0 && c.community.pIntra <= 1.0, "pIntra must lie in [0, 1]");
    } else {
      need(c.erNodes >= 1 && c.erNodes <= c.maxNodes(), "erNodes must lie in [1, maxNodes]");
      need(c.erP >= 0.0 && c.erP <= 1.0, "erP must lie in [0, 1]");
    }
  }
  need(c.trainFraction > 0.0 && c.trainFraction <= 1.0, "trainFraction must lie in (0, 1]");
  need(!c.outDir.empty(), "outDir must be set");
}

std::string describeConfigKeys(const RunConfig& cfg) {
  std::ostringstream o;
  for (const auto& [name, key] : configKeys()) {
    std::string v = key.get(cfg);
    o << "  " << name << " = " << (v.empty() ? "\"\"" : v) << '\n';
  }
  return o.str();
}

namespace {

json readJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

void writeText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw InputError("write to '" + path.string() + "' failed");
}

const Graph& pickGraph(const GraphDataset& ds, std::size_t index, const std::string& path) {
  if (index >= ds.graphs.size()) {
    throw InputError("'" + path + "' has " + std::to_string(ds.graphs.size()) + " graphs; index " +
                     std::to_string(index) + " is out of range");
  }
  return ds.graphs[index];
}

std::vector<NodeId> parseOrder(const std::string& text) {
  std::vector<NodeId> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::string t = trim(item);
    int v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || p != t.data() + t.size()) {
      throw UsageError("--order expects comma-separated node ids, got '" + text + "'");
    }
    out.push_back(v);
  }
  return out;
}

json cellsJson(const OrbitPartition& p) {
  json cells = json::array();
  for (const auto& c : p.cells) cells.push_back(c);
  return cells;
}

struct SymmetryArgs {
  std::string graph;
  std::size_t index = 0;
  bool exactSeq = false;
  std::string order;
  std::size_t budget = SearchBudget{}.maxNodes;
};

int cmdSymmetry(const SymmetryArgs& a, std::ostream& out) {
  GraphDataset ds = loadDataset(a.graph);
  const Graph& g = pickGraph(ds, a.index, a.graph);
  SearchBudget budget{a.budget};
  SymmetryReport r = analyzeSymmetry(g, budget);
  json j = {{"nodeCount", g.nodeCount()},
            {"edgeCount", g.edgeCount()},
            {"autCount", r.autCount.str()},
            {"logAutCount", logOf(r.autCount)},
            {"orbits", cellsJson(r.orbits)},
            {"stableColoring", r.stableColoring.colors},
            {"colorClassCount", r.stableColoring.classCount()}};
  if (a.exactSeq || !a.order.empty()) {
    NodeOrdering pi = a.order.empty() ? NodeOrdering::identity(g.nodeCount()) : NodeOrdering(parseOrder(a.order));
    if (pi.size() != g.nodeCount()) throw UsageError("--order must list every node exactly once");
    std::vector<NodeId> perm(pi.perm().begin(), pi.perm().end());
    j["order"] = perm;
    j["sequenceMultiplicityExact"] = sequenceMultiplicityExact(g, pi, budget).str();
    j["sequenceMultiplicityCR"] = sequenceMultiplicityCR(g, pi).str();
    j["logSequenceMultiplicityCR"] = logSequenceMultiplicityCR(g, pi);
  }
  out << j.dump(2) << '\n';
  return 0;
}

struct TrainArgs {
  std::string config;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> epochs;
  std::string outDir;
};

int cmdTrain(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  std::ifstream in(a.config);
  if (!in) throw UsageError("cannot open config '" + a.config + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig cfg = parseRunConfig(buf.str());
  for (const auto& kv : a.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    setConfigValue(cfg, trim(std::string_view(kv).substr(0, eq)), trim(std::string_view(kv).substr(eq + 1)));
  }
  if (a.seed) cfg.train.seed = *a.seed;
  if (a.threads) cfg.train.threads = *a.threads;
  if (a.epochs) cfg.train.epochs = *a.epochs;
  if (!a.outDir.empty()) cfg.outDir = a.outDir;
  cfg.train.trainPosterior = cfg.learnedPosterior;
  validateRunConfig(cfg);

  const Rng root(cfg.train.seed);
  GraphDataset ds;
  if (!cfg.data.empty()) {
    ds = loadDataset(cfg.data);
  } else if (cfg.generator == "community") {
    ds = genCommunitySmall(cfg.community, root.split(0xD47A));
  } else {
    ds = genER(cfg.community.count, cfg.erNodes, cfg.erP, root.split(0xD47A));
  }
  for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
    if (ds.graphs[i].nodeCount() > cfg.maxNodes()) {
      throw InputError("graph " + std::to_string(i) + " has " + std::to_string(ds.graphs[i].nodeCount()) +
                       " nodes, more than maxNodes = " + std::to_string(cfg.maxNodes()));
    }
  }
  if (ds.graphs.empty()) throw InputError("training dataset is empty");

  std::filesystem::path dir(cfg.outDir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory '" + cfg.outDir + "'");

  GraphDataset trainSet = ds, testSet;
  if (cfg.trainFraction < 1.0) {
    std::tie(trainSet, testSet) = splitDataset(ds, cfg.trainFraction, root.split(0x5917));
    saveDataset(testSet, dir / "test.graph");
  }
  saveDataset(trainSet, dir / "train.graph");

  Rng initModel = root.split(0x1417);
  Rng initPosterior = root.split(0x1418);
  std::unique_ptr<GraphModel> model;
  if (cfg.model == ModelKind::adjacency) model = std::make_unique<AdjModel>(cfg.adjacency, initModel);
  else model = std::make_unique<SeqModel>(cfg.sequence, initModel);
  std::optional<OrderPosterior> posterior;
  if (cfg.learnedPosterior) posterior.emplace(cfg.posterior, initPosterior);

  json meta = {{"trainConfig", cfg.train.toJson()}};
  auto saveAll = [&](const std::string& suffix) {
    writeText(dir / ("model" + suffix + ".json"), saveModel(*model, meta).dump() + "\n");
    if (posterior) writeText(dir / ("posterior" + suffix + ".json"), savePosterior(*posterior, meta).dump() + "\n");
  };
  auto onEpoch = [&](const EpochRecord& rec) {
    if (cfg.checkpointEvery > 0 && rec.epoch % cfg.checkpointEvery == 0) {
      saveAll("-epoch" + std::to_string(rec.epoch));
    }
  };
  TrainReport report =
      train(*model, posterior ? &*posterior : nullptr, trainSet.graphs, cfg.train, &out, onEpoch);
  saveAll("");
  json rep = report.toJson();
  rep["dataset"] = {{"name", ds.name}, {"provenance", ds.provenance}, {"train", trainSet.size()},
                    {"test", testSet.size()}};
  writeText(dir / "report.json", rep.dump(2) + "\n");
  err << "wrote " << (dir / "model.json").string() << (posterior ? " and posterior.json" : "") << '\n';
  return 0;
}

struct SampleArgs {
  std::string checkpoint;
  std::size_t count = 10;
  std::uint64_t seed = 0;
  std::string out;
};

int cmdSample(const SampleArgs& a, std::ostream& out) {
  auto model = loadModel(readJsonFile(a.checkpoint));
  GraphDataset ds;
  ds.name = "samples";
  const Rng root(a.seed);
  for (std::size_t i = 0; i < a.count; ++i) {
    Rng r = root.split(i);
    ds.graphs.push_back(model->sample(r));
  }
  if (a.out.empty()) out << formatDataset(ds);
  else saveDataset(ds, a.out);
  return 0;
}

struct LoglikArgs {
  std::string checkpoint;
  std::string data;
  std::string posterior;
  std::string proposal = "uniform";
  std::size_t L = 1000;
  std::size_t exactMaxN = 8;
  std::string multiplicity = "exact";
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

int cmdLoglik(const LoglikArgs& a, std::ostream& out) {
  if (a.proposal != "learned" && a.proposal != "uniform") throw UsageError("--proposal must be learned or uniform");
  if (a.proposal == "learned" && a.posterior.empty()) throw UsageError("--proposal learned needs --posterior <file>");
  if (a.L == 0) throw UsageError("--L must be >= 1");
  if (a.threads == 0) throw UsageError("--threads must be >= 1");
  MultiplicityMode mode;
  try {
    mode = parseMultiplicityMode(a.multiplicity);
  } catch (const InputError& e) {
    throw UsageError(e.what());
  }
  auto model = loadModel(readJsonFile(a.checkpoint));
  std::optional<OrderPosterior> learned;
  if (a.proposal == "learned") learned.emplace(loadPosterior(readJsonFile(a.posterior)));
  const UniformOrdering uniform;
  const OrderingDistribution& q = learned ? static_cast<const OrderingDistribution&>(*learned) : uniform;
  GraphDataset ds = loadDataset(a.data);
  const Rng root(a.seed);
  json graphs = json::array();
  double sumEst = 0.0, sumExact = 0.0, sumAbs = 0.0;
  std::size_t exactCount = 0;
  for (std::size_t i = 0; i < ds.graphs.size(); ++i) {
    const Graph& g = ds.graphs[i];
    ImportanceEstimate est = importanceLogLik(*model, q, g, a.L, root.split(i), mode, a.threads);
    json row = {{"index", i},
                {"nodes", g.nodeCount()},
                {"isEstimate", est.estimate},
                {"stderr", std::isfinite(est.standardError) ? json(est.standardError) : json(nullptr)},
                {"L", est.samples},
                {"exact", nullptr}};
    if (g.nodeCount() <= a.exactMaxN) {
      const double ex = exactLogLik(*model, g, a.exactMaxN, mode);
      row["exact"] = ex;
      sumExact += ex;
      sumAbs += std::abs(est.estimate - ex);
      ++exactCount;
    }
    sumEst += est.estimate;
    graphs.push_back(row);
  }
  const double n = static_cast<double>(std::max<std::size_t>(ds.graphs.size(), 1));
  json rep = {{"proposal", a.proposal},
              {"L", a.L},
              {"multiplicity", a.multiplicity},
              {"seed", a.seed},
              {"graphs", graphs},
              {"meanIsEstimate", sumEst / n}};
  if (exactCount == ds.graphs.size() && exactCount > 0) {
    rep["meanExact"] = sumExact / n;
    rep["meanAbsError"] = sumAbs / n;
  }
  out << rep.dump(2) << '\n';
  return 0;
}

struct MmdArgs {
  std::string ref;
  std::string gen;
  double sigma = 1.0;
};

int cmdMmd(const MmdArgs& a, std::ostream& out) {
  if (!(a.sigma > 0.0)) throw UsageError("--sigma must be > 0");
  GraphDataset ref = loadDataset(a.ref);
  GraphDataset gen = loadDataset(a.gen);
  if (ref.graphs.empty() || gen.graphs.empty()) throw InputError("mmd needs two nonempty datasets");
  std::vector<GraphStatistics> sr, sg;
  for (const auto& g : ref.graphs) sr.push_back(computeStatistics(g));
  for (const auto& g : gen.graphs) sg.push_back(computeStatistics(g));
  json pairs = json::array();
  for (Statistic s : kAllStatistics) pairs.push_back({{"statistic", toString(s)}, {"mmd", mmd(sr, sg, s, a.sigma)}});
  json rep = {{"ref", a.ref}, {"gen", a.gen}, {"sigma", a.sigma}, {"pairs", pairs}};
  out << rep.dump(2) << '\n';
  return 0;
}

struct AnalyzeArgs {
  std::string checkpoint;
  std::string graph;
  std::size_t index = 0;
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  std::string out;
};

int cmdAnalyze(const AnalyzeArgs& a, std::ostream& out) {
  if (a.samples == 0) throw UsageError("--samples must be >= 1");
  OrderPosterior q = loadPosterior(readJsonFile(a.checkpoint));
  GraphDataset ds = loadDataset(a.graph);
  const Graph& g = pickGraph(ds, a.index, a.graph);
  nn::Matrix m = averagedAdjacency(q, g, a.samples, Rng(a.seed));
  if (a.out.empty()) {
    writeCsv(out, m);
  } else {
    std::ofstream f(a.out);
    if (!f) throw InputError("cannot write '" + a.out + "'");
    writeCsv(f, m);
  }
  return 0;
}

}  // namespace

int runCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Graph generative models with learned node-ordering posteriors"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  SymmetryArgs sym;
  auto* cSym = app.add_subcommand("symmetry", "Automorphism count, orbits and multiplicities of a graph");
  cSym->add_option("graph", sym.graph, "Dataset file")->required();
  cSym->add_option("--index", sym.index, "Graph index within the file")->capture_default_str();
  cSym->add_flag("--exact-seq", sym.exactSeq, "Also report sequence multiplicities (identity order if --order absent)");
  cSym->add_option("--order", sym.order, "Ordering as comma-separated node ids");
  cSym->add_option("--budget", sym.budget, "Search-node budget for the backtracking search")->capture_default_str();

  TrainArgs tr;
  auto* cTrain = app.add_subcommand("train", "Train a model, variationally or with uniform orderings");
  cTrain->add_option("--config", tr.config, "key = value configuration file")->required();
  cTrain->add_option("--set", tr.overrides, "Override a config key (key=value), repeatable");
  cTrain->add_option("--seed", tr.seed, "Override the seed");
  cTrain->add_option("--threads", tr.threads, "Override the worker count");
  cTrain->add_option("--epochs", tr.epochs, "Override the epoch count");
  cTrain->add_option("--out-dir", tr.outDir, "Override the output directory");
  cTrain->footer("Config keys and defaults:\n" + describeConfigKeys());

  SampleArgs sa;
  auto* cSample = app.add_subcommand("sample", "Sample graphs from a model checkpoint");
  cSample->add_option("--checkpoint", sa.checkpoint, "Model checkpoint")->required();
  cSample->add_option("--count", sa.count, "Number of graphs")->capture_default_str();
  cSample->add_option("--seed", sa.seed, "Seed")->capture_default_str();
  cSample->add_option("--out", sa.out, "Output dataset file (default: standard output)");

  LoglikArgs ll;
  auto* cLl = app.add_subcommand("loglik", "Importance-sampled (and exact, when small) log-likelihoods");
  cLl->add_option("--checkpoint", ll.checkpoint, "Model checkpoint")->required();
  cLl->add_option("--data", ll.data, "Dataset file")->required();
  cLl->add_option("--posterior", ll.posterior, "Posterior checkpoint for --proposal learned");
  cLl->add_option("--proposal", ll.proposal, "learned or uniform")->capture_default_str();
  cLl->add_option("--L", ll.L, "Importance samples per graph")->capture_default_str();
  cLl->add_option("--exact-max-n", ll.exactMaxN, "Enumerate orderings exactly up to this size")->capture_default_str();
  cLl->add_option("--multiplicity", ll.multiplicity, "exact or cr (sequence models)")->capture_default_str();
  cLl->add_option("--seed", ll.seed, "Seed")->capture_default_str();
  cLl->add_option("--threads", ll.threads, "Worker threads")->capture_default_str();

  MmdArgs mm;
  auto* cMmd = app.add_subcommand("mmd", "MMD between two graph sets for every statistic");
  cMmd->add_option("--ref", mm.ref, "Reference dataset")->required();
  cMmd->add_option("--gen", mm.gen, "Generated dataset")->required();
  cMmd->add_option("--sigma", mm.sigma, "Kernel bandwidth")->capture_default_str();

  AnalyzeArgs an;
  auto* cAn = app.add_subcommand("analyze-order", "Averaged adjacency matrix under a posterior, as CSV");
  cAn->add_option("--checkpoint", an.checkpoint, "Posterior checkpoint")->required();
  cAn->add_option("--graph", an.graph, "Dataset file")->required();
  cAn->add_option("--index", an.index, "Graph index within the file")->capture_default_str();
  cAn->add_option("--samples", an.samples, "Sampled orderings")->capture_default_str();
  cAn->add_option("--seed", an.seed, "Seed")->capture_default_str();
  cAn->add_option("--out", an.out, "CSV file (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << "run with --help for usage\n";
    return static_cast<int>(ExitCode::usage);
  }

  try {
    if (cSym->parsed()) return cmdSymmetry(sym, out);
    if (cTrain->parsed()) return cmdTrain(tr, out, err);
    if (cSample->parsed()) return cmdSample(sa, out);
    if (cLl->parsed()) return cmdLoglik(ll, out);
    if (cMmd->parsed()) return cmdMmd(mm, out);
    if (cAn->parsed()) return cmdAnalyze(an, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::usage);
  } catch (const NumericError& e) {
    err << "error: numeric: " << e.what() << '\n';
    return static_cast<int>(ExitCode::numeric);
  } catch (const ResourceError& e) {
    err << "error: resource: " << e.what() << '\n';
    return static_cast<int>(ExitCode::numeric);
  } catch (const Error& e) {
    err << "error: data: " << e.what() << '\n';
    return static_cast<int>(ExitCode::data);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::numeric);
  }
  return static_cast<int>(ExitCode::usage);
}

}  // namespace ordvi
