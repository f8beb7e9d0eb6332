#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "cli_helpers.hpp"
#include "helpers.hpp"
#include "hotkit/synth.hpp"
#include "hotkit/tensorio.hpp"

using namespace hotkit;
using testing::read_csv;
using testing::run_cli;
namespace fs = std::filesystem;

namespace {

/// Single-image dataset for the worked 2x2 depth example.
fs::path worked_hpp_dataset() {
  const auto dir = testing::fresh_dir("cli_hpp_data");
  DatasetEntry e{"w", LabelMap::filled(2, 2, 0), {}, {}, {}, {}, {}};
  e.depth = DepthMap::raw(testing::field({{0.0, 0.5}, {0.5, 1.0}}));
  e.masks = PersonMaskSet(1, 2, 2, {1, 0, 0, 0});
  write_dataset_entry(dir, e);
  return dir;
}

std::vector<float> read_field(const fs::path& path) { return read_htf(path).f32(); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit 2 and help exits 0") {
    CHECK(run_cli({}).code == 2);
    CHECK(run_cli({"frobnicate"}).code == 2);
    CHECK(run_cli({"eval"}).code == 2);
    CHECK(run_cli({"--help"}).code == 0);
    CHECK(run_cli({"synth", "--out", "x", "--noise", "abc"}).code == 2);
    CHECK(run_cli({"--threads", "-3", "gradcheck"}).code == 2);
  }

  TEST_CASE("HOTKIT_THREADS is validated") {
    ::setenv("HOTKIT_THREADS", "many", 1);
    CHECK(run_cli({"gradcheck", "--trials", "1"}).code == 2);
    ::setenv("HOTKIT_THREADS", "2", 1);
    CHECK(run_cli({"gradcheck", "--trials", "1"}).code == 0);
    ::unsetenv("HOTKIT_THREADS");
  }

  TEST_CASE("hpp writes hard and soft masks") {
    const auto data = worked_hpp_dataset();
    const auto out = data / "fm";
    REQUIRE(run_cli({"hpp", "--data", data, "--tau", "0.3", "--mode", "hard", "--out", out}).code == 0);
    CHECK(read_field(out / "w.fm.htf") == std::vector<float>{1, 0, 0, 0});
    REQUIRE(run_cli({"hpp", "--data", data, "--tau", "0.3", "--mode", "soft", "--out", out}).code == 0);
    const auto soft = read_field(out / "w.fm.htf");
    CHECK(soft[0] == doctest::Approx(0.09f));
    CHECK(soft[1] == 0.0f);
    CHECK(soft[3] == 0.0f);
    REQUIRE(run_cli({"hpp", "--data", data, "--tau", "1.5", "--mode", "hard", "--out", out}).code == 0);
    CHECK(read_field(out / "w.fm.htf") == std::vector<float>{1, 1, 1, 1});
    CHECK(run_cli({"hpp", "--data", data, "--tau", "0", "--out", out}).code == 2);
    CHECK(run_cli({"hpp", "--data", data, "--mode", "fuzzy", "--out", out}).code == 2);
    fs::remove_all(data);
  }

  TEST_CASE("hpp rejects constant depth") {
    const auto dir = testing::fresh_dir("cli_hpp_flat");
    DatasetEntry e{"f", LabelMap::filled(2, 2, 0), {}, {}, {}, {}, {}};
    e.depth = DepthMap::raw(ScalarField(2, 2, 3.0));
    e.masks = PersonMaskSet(1, 2, 2, {1, 0, 0, 0});
    write_dataset_entry(dir, e);
    const auto r = run_cli({"hpp", "--data", dir, "--out", dir / "fm"});
    CHECK(r.code == 2);
    CHECK(r.err.find("constant depth") != std::string::npos);
    fs::remove_all(dir);
  }

  TEST_CASE("regions components and enclosed masks") {
    const auto dir = testing::fresh_dir("cli_regions");
    write_htf(to_tensor(testing::binary({{1, 1, 0, 0}, {1, 0, 0, 1}, {0, 0, 1, 1}, {0, 1, 1, 1}})),
              dir / "mask.htf");
    auto r = run_cli({"regions", "--in", dir / "mask.htf", "--op", "components", "--out", dir / "cc.htf"});
    CHECK(r.code == 0);
    CHECK(r.out.find("components 2") != std::string::npos);
    CHECK(read_field(dir / "cc.htf") ==
          std::vector<float>{1, 1, 0, 0, 1, 0, 0, 2, 0, 0, 2, 2, 0, 2, 2, 2});

    const auto fixture = testing::labels({{0, 0, 1, 1, 1, 5, 5},
                                          {0, 0, 1, 1, 1, 5, 5},
                                          {1, 1, 1, 1, 1, 1, 1},
                                          {1, 1, 1, 4, 1, 1, 1},
                                          {1, 1, 1, 1, 1, 1, 1},
                                          {6, 6, 1, 1, 1, 1, 1},
                                          {6, 6, 1, 1, 1, 1, 1}});
    write_htf(to_tensor(fixture), dir / "fig.htf");
    r = run_cli({"regions", "--in", dir / "fig.htf", "--class", "1", "--op", "enclosed", "--out", dir / "enc.htf"});
    CHECK(r.code == 0);
    CHECK(r.out.find("boundary labels {0,1,2,4}") != std::string::npos);
    std::vector<std::uint8_t> expected(49, 0);
    expected[3 * 7 + 3] = 1;
    CHECK(read_htf(dir / "enc.htf").u8() == expected);

    r = run_cli({"regions", "--in", dir / "fig.htf", "--class", "5", "--op", "components", "--out", dir / "c5.htf"});
    CHECK(r.out.find("components 1") != std::string::npos);

    write_htf(to_tensor(LabelMap::filled(5, 5, 2)), dir / "flat.htf");
    CHECK(run_cli({"regions", "--in", dir / "flat.htf", "--class", "2", "--op", "enclosed", "--out", dir / "z.htf"}).code == 0);
    CHECK(read_htf(dir / "z.htf").u8() == std::vector<std::uint8_t>(25, 0));

    CHECK(run_cli({"regions", "--in", dir / "fig.htf", "--class", "0", "--op", "enclosed", "--out", dir / "e.htf"}).code == 2);
    CHECK(run_cli({"regions", "--in", dir / "fig.htf", "--class", "18", "--op", "enclosed", "--out", dir / "e.htf"}).code == 2);
    CHECK(run_cli({"regions", "--in", dir / "fig.htf", "--op", "enclosed", "--out", dir / "e.htf"}).code == 2);
    // A label map with ids above 1 is not a binary field.
    CHECK(run_cli({"regions", "--in", dir / "fig.htf", "--op", "components", "--out", dir / "e.htf"}).code == 2);
    fs::remove_all(dir);
  }

  TEST_CASE("synth is deterministic and validates its size") {
    const auto dir = testing::fresh_dir("cli_synth");
    const std::vector<std::string> base{"synth", "--n", "3", "--seed", "9", "--size", "32x48", "--noise", "0.1", "--blobs", "1"};
    auto a = base, b = base;
    a.insert(a.end(), {"--out", dir / "a"});
    b.insert(b.end(), {"--out", dir / "b", "--threads", "3"});
    REQUIRE(run_cli(a).code == 0);
    REQUIRE(run_cli(b).code == 0);
    CHECK(testing::same_tree(dir / "a", dir / "b"));
    CHECK(fs::exists(dir / "a" / "img_00002.sim.htf"));

    CHECK(run_cli({"synth", "--out", dir / "empty", "--n", "0"}).code == 0);
    CHECK(fs::is_empty(dir / "empty"));
    CHECK(run_cli({"synth", "--out", dir / "bad", "--size", "64"}).code == 2);
    CHECK(run_cli({"synth", "--out", dir / "bad", "--size", "30x30"}).code == 2);
    CHECK(run_cli({"synth", "--out", dir / "bad", "--size", "0x64"}).code == 2);
    fs::remove_all(dir);
  }

  TEST_CASE("loss report columns") {
    const auto dir = testing::fresh_dir("cli_loss");
    REQUIRE(run_cli({"synth", "--out", dir / "blobs", "--n", "4", "--seed", "2", "--blobs", "2"}).code == 0);
    REQUIRE(run_cli({"loss", "--data", dir / "blobs", "--out", dir / "l.csv"}).code == 0);
    auto rows = read_csv(dir / "l.csv");
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] == std::vector<std::string>{"image_id", "ce", "local_jl", "global_jl", "prompt_be", "total"});
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::stod(rows[i][3]) > 0.0);

    REQUIRE(run_cli({"loss", "--data", dir / "blobs", "--alpha", "0", "--beta", "0", "--gamma", "0", "--out", dir / "z.csv"}).code == 0);
    rows = read_csv(dir / "z.csv");
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][5] == rows[i][1]);

    REQUIRE(run_cli({"synth", "--out", dir / "clean", "--n", "3", "--seed", "4"}).code == 0);
    REQUIRE(run_cli({"loss", "--data", dir / "clean", "--out", dir / "c.csv"}).code == 0);
    rows = read_csv(dir / "c.csv");
    for (std::size_t i = 1; i < rows.size(); ++i) {
      CHECK(std::stod(rows[i][1]) == 0.0);
      CHECK(std::stod(rows[i][2]) == 0.0);
      CHECK(std::stod(rows[i][4]) < 1e-6);
    }

    for (const auto& id : {"img_00000", "img_00001", "img_00002"})
      fs::remove(dataset_file(dir / "clean", id, "sim"));
    CHECK(run_cli({"loss", "--data", dir / "clean", "--out", dir / "x.csv"}).code == 2);
    REQUIRE(run_cli({"loss", "--data", dir / "clean", "--gamma", "0", "--out", dir / "g.csv"}).code == 0);
    CHECK(read_csv(dir / "g.csv")[1][4].empty());
    CHECK(run_cli({"loss", "--data", dir / "clean", "--alpha", "-1", "--out", dir / "x.csv"}).code == 2);
    fs::remove_all(dir);
  }

  TEST_CASE("eval report") {
    const auto dir = testing::fresh_dir("cli_eval");
    REQUIRE(run_cli({"synth", "--out", dir / "d", "--n", "3", "--seed", "5"}).code == 0);
    auto r = run_cli({"eval", "--data", dir / "d", "--out", dir / "e.csv"});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("sc_acc 100.0000") != std::string::npos);
    auto rows = read_csv(dir / "e.csv");
    REQUIRE(rows.size() == 5);
    CHECK(rows[0].size() == 23);
    CHECK(rows[0][22] == "iou_c17");
    CHECK(rows[4][0] == "aggregate");
    for (int k = 1; k <= 4; ++k) CHECK(std::stod(rows[4][k]) == 100.0);
    CHECK(std::stod(rows[4][5]) > 99.999);
    CHECK(run_cli({"eval", "--data", dir / "d", "--pred-res", "quarter", "--out", dir / "q.csv"}).code == 2);

    // All-contact predictions at quarter resolution.
    for (const auto& id : list_image_ids(dir / "d")) {
      auto e = load_dataset_entry(dir / "d", id, {.masks = true});
      e.pred = all_contact_prediction(downsample_labels_nearest(e.gt, 4));
      write_dataset_entry(dir / "d", e);
    }
    REQUIRE(run_cli({"eval", "--data", dir / "d", "--pred-res", "quarter", "--out", dir / "a.csv"}).code == 0);
    rows = read_csv(dir / "a.csv");
    CHECK(std::stod(rows[4][2]) == 100.0);
    CHECK(std::abs(std::stod(rows[4][5])) < 1e-3);

    fs::remove(dataset_file(dir / "d", "img_00001", "pred"));
    r = run_cli({"eval", "--data", dir / "d", "--out", dir / "m.csv"});
    CHECK(r.code == 2);
    CHECK(r.err.find("img_00001.pred.htf") != std::string::npos);
    CHECK(run_cli({"eval", "--data", dir / "nothing", "--out", dir / "m.csv"}).code == 2);
    fs::remove_all(dir);
  }

  TEST_CASE("gradcheck exit codes") {
    auto r = run_cli({"gradcheck", "--trials", "3"});
    CHECK(r.code == 0);
    CHECK(r.out.find("cross_entropy") != std::string::npos);
    r = run_cli({"gradcheck", "--trials", "3", "--eps", "1e-1"});
    CHECK(r.code == 1);
    CHECK(r.out.find("scene seed") != std::string::npos);
    CHECK(run_cli({"gradcheck", "--trials", "0"}).code == 2);
    CHECK(run_cli({"gradcheck", "--eps", "-1"}).code == 2);
  }

  TEST_CASE("bench reports finite medians") {
    const auto r = run_cli({"bench", "--size", "64x64", "--iters", "3"});
    CHECK(r.code == 0);
    for (const char* name : {"label_components", "enclosed_sweep", "evaluate_image", "soft_filter_mask", "pipeline"})
      CHECK(r.out.find(name) != std::string::npos);
    const auto b = hotkit::cli::run_bench(64, 64, 3);
    for (const auto& t : {b.label_components, b.enclosed_sweep, b.evaluate_image, b.soft_filter_mask, b.pipeline}) {
      CHECK(t.median_ms > 0.0);
      CHECK(std::isfinite(t.p95_ms));
      CHECK(t.p95_ms >= t.median_ms);
    }
    CHECK(run_cli({"bench", "--size", "64x64", "--iters", "0"}).code == 2);
  }
}
