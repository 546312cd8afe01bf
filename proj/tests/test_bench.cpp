#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "featadapt/bench.hpp"
#include "featadapt/errors.hpp"
#include "featadapt/run_config.hpp"

using namespace featadapt;

namespace {

BenchConfig small_config() {
  BenchConfig b;
  b.scale = 0.05;
  b.grid = {20, 40};
  b.seeds = {1, 2};
  b.holdout = 500;
  return b;
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("fnv1a64 reference values") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("bench config validation and hash") {
  BenchConfig b = small_config();
  CHECK_NOTHROW(b.validate());
  CHECK(b.hash().size() == 16);
  BenchConfig c = b;
  c.threads = 4;
  CHECK(c.hash() == b.hash());
  c.grid = {20, 60};
  CHECK(c.hash() != b.hash());
  c.grid = {40, 20};
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = b;
  c.methods = {"lasso"};
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = b;
  c.template_name = "other";
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("bench CSV schema and determinism") {
  const BenchConfig b = small_config();
  const BenchResult r = bench_figure1(b);
  CHECK(r.rows.size() == 2 * 2 * 2);
  CHECK(r.summary.size() == 2 * 2 * 3);
  CHECK(r.config_hash == b.hash());
  CHECK(r.v_star_norm_sq == doctest::Approx(2.0));
  for (const auto& row : r.rows) {
    CHECK(row.status == "ok");
    CHECK(row.excess_risk >= 0);
    CHECK(row.rel_excess_risk == doctest::Approx(row.excess_risk / 2.0));
    CHECK(row.holdout_error >= 0);
  }
  std::ostringstream a;
  write_bench_csv(a, r);
  const auto ls = lines(a.str());
  REQUIRE(ls.size() == 1 + r.rows.size() + r.summary.size());
  CHECK(ls[0] == kBenchCsvHeader);
  CHECK(ls[0] == "method,m,seed,holdout_error,excess_risk,rel_excess_risk,converged,status,version,config_hash");
  for (const auto& l : ls) CHECK(std::count(l.begin(), l.end(), ',') == 9);
  CHECK(ls[1].rfind("bp,20,1,", 0) == 0);

  BenchConfig t = b;
  t.threads = 3;
  std::ostringstream c;
  write_bench_csv(c, bench_figure1(t));
  CHECK(c.str() == a.str());
}

TEST_CASE("bench median ignores failed runs") {
  BenchResult r;
  r.rows = {{"bp", 10, "0", 1, 3, 0, 1, "ok"}, {"bp", 10, "1", 1, 1, 0, 1, "ok"}, {"bp", 10, "2", 1, 100, 0, 0, "failed: x"}};
  CHECK(r.median("bp", 10) == 2.0);
}

TEST_CASE("config parsing") {
  std::istringstream in("# comment\n\njob = bench\ngrid = 20:40:10\n  seeds=3\n");
  const KeyValueConfig c = parse_config(in, "t.cfg");
  CHECK(c.get("job") == "bench");
  CHECK(c.get("grid") == "20:40:10");
  CHECK(c.get("seeds") == "3");
  CHECK(c.entries[1].line == 4);
  CHECK_THROWS_AS(c.get("scale"), ValidationError);

  std::istringstream unk("grid=1\nbogus=2\n");
  try {
    parse_config(unk, "x.cfg");
    FAIL("expected an error");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()) == "x.cfg:2: unknown key 'bogus'");
  }
  std::istringstream dup("grid=1\ngrid=2\n");
  CHECK_THROWS_AS(parse_config(dup), FormatError);
  std::istringstream bad("grid\n");
  CHECK_THROWS_AS(parse_config(bad), FormatError);
  CHECK_THROWS_AS(load_config("/nonexistent/featadapt.cfg"), IoError);

  std::istringstream again(format_config(c));
  const KeyValueConfig d = parse_config(again);
  CHECK(d.entries.size() == c.entries.size());
  for (std::size_t i = 0; i < d.entries.size(); ++i) CHECK(d.entries[i].value == c.entries[i].value);
}

TEST_CASE("grid syntax") {
  CHECK(parse_grid("40,60,80") == std::vector<int>{40, 60, 80});
  CHECK(parse_grid("40:70:10") == std::vector<int>{40, 50, 60, 70});
  CHECK(parse_grid("5") == std::vector<int>{5});
  CHECK_THROWS_AS(parse_grid("1:2"), FormatError);
  CHECK_THROWS_AS(parse_grid("1:5:0"), FormatError);
  CHECK_THROWS_AS(parse_grid("a,b"), FormatError);
}

TEST_CASE("bench_config_from and run_config") {
  std::istringstream in("template=figure1\nscale=0.05\ngrid=20,40\nseed=1\nseeds=2\nholdout=500\n");
  KeyValueConfig c = parse_config(in);
  const BenchConfig b = bench_config_from(c);
  CHECK(b.seeds == std::vector<std::uint64_t>{1, 2});
  CHECK(b.hash() == small_config().hash());

  const std::string out = (std::filesystem::temp_directory_path() / "featadapt_bench" / "r.csv").string();
  std::filesystem::remove_all(std::filesystem::path(out).parent_path());
  set_config_value(c, "out", out);
  std::ostringstream log;
  CHECK(run_config(c, log) == 0);
  std::ifstream f(out);
  std::string header;
  std::getline(f, header);
  CHECK(header == kBenchCsvHeader);
  CHECK_THROWS_AS(set_config_value(c, "nope", "1"), ValidationError);

  set_config_value(c, "job", "train");
  CHECK_THROWS_AS(run_config(c, log), ValidationError);

  std::istringstream supp("template=suppfig\nn=30\ngrid=10\n");
  CHECK(bench_config_from(parse_config(supp)).methods == std::vector<std::string>{"bp"});
}
