#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ordvi/cli.hpp"
#include "ordvi/errors.hpp"
#include "ordvi/genmodels.hpp"

using namespace ordvi;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "ordvi");
  std::vector<const char*> argv;
  for (auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = runCli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("ordvi_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config parsing") {
    RunConfig c = parseRunConfig("# comment\nmodel = seq\nmaxNodes = 9\nsamples=4 # trailing\n\nposterior = uniform\n");
    CHECK((c.model == ModelKind::sequence));
    CHECK(c.sequence.maxNodes == 9);
    CHECK(c.train.samples == 4);
    CHECK(!c.learnedPosterior);
    CHECK(!c.train.trainPosterior);
    try {
      parseRunConfig("model = adj\nbogus = 1\n");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS(parseRunConfig("samples = many\n"));
    CHECK_THROWS(parseRunConfig("samples\n"));
    RunConfig bad;
    bad.train.samples = 0;
    CHECK_THROWS_AS(validateRunConfig(bad), UsageError);
    CHECK(describeConfigKeys().find("lrTheta") != std::string::npos);
  }

  TEST_CASE("usage errors exit with 1") {
    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"loglik", "--data", "x"}).code == 1);
    auto r = run({"sample", "--checkpoint", "m.json", "--count", "lots"});
    CHECK(r.code == 1);
    CHECK(r.err.find("error:") != std::string::npos);
    CHECK(run({"--help"}).code == 0);
  }

  TEST_CASE("symmetry command") {
    fs::path dir = scratch("sym");
    write(dir / "g.graph", "3 3\n0 1\n0 2\n1 2\n\n4 3\n0 1\n1 2\n2 3\n");
    auto r = run({"symmetry", (dir / "g.graph").string(), "--exact-seq"});
    REQUIRE(r.code == 0);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["autCount"] == "6");
    CHECK(j["orbits"].size() == 1);
    CHECK(j["sequenceMultiplicityExact"] == "6");
    auto p = nlohmann::json::parse(run({"symmetry", (dir / "g.graph").string(), "--index", "1"}).out);
    CHECK(p["autCount"] == "2");
    CHECK(p["orbits"].size() == 2);
    CHECK(run({"symmetry", (dir / "g.graph").string(), "--index", "5"}).code != 0);
    write(dir / "bad.graph", "3 2\n0 1\n");
    auto bad = run({"symmetry", (dir / "bad.graph").string()});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("line") != std::string::npos);
    CHECK(run({"symmetry", (dir / "missing.graph").string()}).code == 2);
    write(dir / "k9.graph", "9 36\n0 1\n0 2\n0 3\n0 4\n0 5\n0 6\n0 7\n0 8\n1 2\n1 3\n1 4\n1 5\n1 6\n1 7\n1 8\n2 3\n2 4\n"
                            "2 5\n2 6\n2 7\n2 8\n3 4\n3 5\n3 6\n3 7\n3 8\n4 5\n4 6\n4 7\n4 8\n5 6\n5 7\n5 8\n6 7\n6 8\n7 8\n");
    CHECK(run({"symmetry", (dir / "k9.graph").string(), "--budget", "3"}).code == 3);
  }

  TEST_CASE("train, sample, loglik, mmd and analyze-order end to end") {
    fs::path dir = scratch("e2e");
    write(dir / "run.cfg",
          "model = adjacency\nmaxNodes = 6\nstateSize = 8\nembedSize = 4\n"
          "posteriorLayers = 1\nposteriorHeads = 1\nposteriorHeadWidth = 4\n"
          "samples = 2\nepochs = 2\ngenerator = er\ncount = 6\nerNodes = 5\nerP = 0.5\n"
          "trainFraction = 0.5\ncheckpointEvery = 1\n");
    auto tr = run({"train", "--config", (dir / "run.cfg").string(), "--out-dir", (dir / "out").string(), "--seed", "3"});
    REQUIRE_MESSAGE(tr.code == 0, tr.err);
    for (const char* f : {"model.json", "posterior.json", "report.json", "train.graph", "test.graph"})
      CHECK(fs::exists(dir / "out" / f));
    auto rep = nlohmann::json::parse(std::ifstream(dir / "out" / "report.json"));
    CHECK(rep["epochs"].size() == 2);
    CHECK(rep["dataset"]["train"] == 3);
    CHECK(fs::exists(dir / "out" / "model-epoch1.json"));

    const std::string model = (dir / "out" / "model.json").string();
    const std::string post = (dir / "out" / "posterior.json").string();
    const std::string test = (dir / "out" / "test.graph").string();
    auto sa = run({"sample", "--checkpoint", model, "--count", "4", "--seed", "1"});
    REQUIRE(sa.code == 0);
    write(dir / "gen.graph", sa.out);
    CHECK(run({"sample", "--checkpoint", model, "--count", "4", "--seed", "1"}).out == sa.out);

    auto ll = run({"loglik", "--checkpoint", model, "--data", test, "--proposal", "learned", "--posterior", post,
                   "--L", "50"});
    REQUIRE_MESSAGE(ll.code == 0, ll.err);
    auto lj = nlohmann::json::parse(ll.out);
    CHECK(lj["graphs"].size() == 3);
    CHECK(lj["meanAbsError"].get<double>() < 1.0);
    CHECK(run({"loglik", "--checkpoint", model, "--data", test, "--proposal", "learned"}).code == 1);

    auto mm = run({"mmd", "--ref", test, "--gen", (dir / "gen.graph").string()});
    REQUIRE(mm.code == 0);
    CHECK(nlohmann::json::parse(mm.out)["pairs"].size() == 3);

    auto an = run({"analyze-order", "--checkpoint", post, "--graph", test, "--samples", "20"});
    REQUIRE(an.code == 0);
    CHECK(std::count(an.out.begin(), an.out.end(), '\n') == 5);

    // epoch checkpoints and reproducibility
    auto again = run({"train", "--config", (dir / "run.cfg").string(), "--out-dir", (dir / "out2").string(), "--seed",
                      "3"});
    REQUIRE(again.code == 0);
    auto a = nlohmann::json::parse(std::ifstream(dir / "out" / "model.json"));
    auto b = nlohmann::json::parse(std::ifstream(dir / "out2" / "model.json"));
    CHECK(a["parameters"] == b["parameters"]);
  }

  TEST_CASE("loglik of the fair coin model and mmd of a set with itself") {
    fs::path dir = scratch("fair");
    AdjModelConfig cfg;
    cfg.maxNodes = 3;
    cfg.fixedLength = 3;
    cfg.stateSize = 2;
    cfg.embedSize = 2;
    Rng init(0);
    AdjModel m(cfg, init);
    m.params().zeroValues();
    write(dir / "fair.json", saveModel(m).dump());
    write(dir / "k3.graph", "3 3\n0 1\n0 2\n1 2\n");
    auto r = run({"loglik", "--checkpoint", (dir / "fair.json").string(), "--data", (dir / "k3.graph").string(),
                  "--proposal", "uniform", "--L", "20"});
    REQUIRE_MESSAGE(r.code == 0, r.err);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["graphs"][0]["isEstimate"].get<double>() == doctest::Approx(-std::log(8.0)).epsilon(1e-12));
    CHECK(j["graphs"][0]["exact"].get<double>() == doctest::Approx(-std::log(8.0)).epsilon(1e-12));
    write(dir / "x.graph", "4 3\n0 1\n1 2\n2 3\n\n5 4\n0 1\n0 2\n0 3\n0 4\n\n3 1\n0 2\n");
    auto mm = run({"mmd", "--ref", (dir / "x.graph").string(), "--gen", (dir / "x.graph").string()});
    REQUIRE(mm.code == 0);
    for (const auto& p : nlohmann::json::parse(mm.out)["pairs"]) CHECK(p["mmd"].get<double>() == 0.0);
    CHECK(run({"mmd", "--ref", (dir / "x.graph").string(), "--gen", (dir / "x.graph").string(), "--sigma", "0"}).code ==
          1);
  }

  TEST_CASE("train rejects bad configurations") {
    fs::path dir = scratch("badcfg");
    write(dir / "a.cfg", "samples = 0\n");
    CHECK(run({"train", "--config", (dir / "a.cfg").string()}).code == 1);
    write(dir / "b.cfg", "unknown = 3\n");
    CHECK(run({"train", "--config", (dir / "b.cfg").string()}).code == 1);
    CHECK(run({"train", "--config", (dir / "none.cfg").string()}).code != 0);
    write(dir / "c.cfg", "maxNodes = 4\ngenerator = er\nerNodes = 6\ncount = 2\nepochs = 1\n");
    CHECK(run({"train", "--config", (dir / "c.cfg").string(), "--out-dir", (dir / "o").string()}).code == 1);
  }
}
