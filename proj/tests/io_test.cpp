#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>

#include "oracles.hpp"
#include "padic/io.hpp"

using namespace padic;
using io::json;

namespace {

std::string field_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const io::FormatError& e) {
    return e.field();
  }
  return "<no error>";
}

}  // namespace

TEST(GridIo, RoundTripIsExact) {
  GridConfig cfg({BranchSeq({2, 3, 5}), BranchSeq({3, 2, 2, 7})});
  const auto j = io::grid_json(cfg);
  EXPECT_EQ(j["depth"], 3);
  const auto back = io::parse_grid(json::parse(j.dump()));
  EXPECT_TRUE(back == cfg);
  EXPECT_EQ(io::grid_json(back).dump(), j.dump());
}

TEST(GridIo, ErrorsNameTheField) {
  EXPECT_EQ(field_of([] { io::parse_grid(json::parse(R"({"dims":1,"seqs":[[2,2,1]],"depth":3})")); }), "grid.seqs[0][2]");
  EXPECT_EQ(field_of([] { io::parse_grid(json::parse(R"({"dims":2,"seqs":[[2,2]],"depth":2})")); }), "grid.seqs");
  EXPECT_EQ(field_of([] { io::parse_grid(json::parse(R"({"dims":1,"seqs":[[2,2]]})")); }), "grid.depth");
  EXPECT_EQ(field_of([] { io::parse_grid(json::parse(R"({"dims":1,"seqs":[[2,2]],"depth":1})")); }), "grid.depth");
  EXPECT_EQ(field_of([] { io::parse_grid(json::parse(R"({"dims":0,"seqs":[],"depth":0})")); }), "grid.dims");
  EXPECT_EQ(field_of([] { io::parse_grid(json::parse(R"({"dims":1,"seqs":[[2,"x"]],"depth":2})")); }), "grid.seqs[0][1]");
}

TEST(FracIo, BigValuesSurvive) {
  const Frac f = make_frac(BigInt("123456789012345678901234567891"), BigInt("1024"));
  const auto j = io::frac_json(f);
  EXPECT_EQ(j[0], "123456789012345678901234567891");
  EXPECT_EQ(j[1], "1024");
  EXPECT_EQ(io::parse_frac(json::parse(j.dump()), "x"), f);
  EXPECT_EQ(field_of([] { io::parse_frac(json::parse(R"(["1","0"])"), "C"); }), "C");
  EXPECT_EQ(field_of([] { io::parse_frac(json::parse(R"(["1","y"])"), "C"); }), "C[1]");
}

TEST(CoeffIo, RoundTripIsBitExact) {
  auto g = oracle::rng(47);
  GridConfig cfg({BranchSeq({3, 3}), BranchSeq({2, 2})});
  CoeffMap c(cfg, CoeffMode::price);
  for (int t = 0; t < 10; ++t) {
    c.set({oracle::pick(g, 0, 8), oracle::pick(g, 0, 3)}, Complex(oracle::uniform(g, -1, 1), oracle::uniform(g, -1e-3, 1e-3)));
  }
  c.set({0, 0}, Complex(2.0, 0.0));
  const auto back = io::parse_coeffs(json::parse(io::coeffs_json(c).dump()));
  EXPECT_EQ(back.mode(), c.mode());
  EXPECT_EQ(back.entries(), c.entries());
}

TEST(CoeffIo, ErrorsNameTheEntry) {
  const auto base = R"({"mode":"haar","grid":{"dims":1,"seqs":[[2,2]],"depth":2},"entries":[[[1],1.0,0.0],[[9],1.0,0.0]]})";
  EXPECT_EQ(field_of([&] { io::parse_coeffs(json::parse(base)); }), "entries[1]");
  EXPECT_EQ(field_of([] { io::parse_coeffs(json::parse(R"({"mode":"walsh","grid":{},"entries":[]})")); }), "mode");
}

TEST(FamilyIo, RoundTrip) {
  GridConfig cfg({BranchSeq({2, 2, 2})});
  std::vector<FamilyMember> ms;
  ms.push_back(HFamily::piecewise(cfg, {uniform_cell(1, {0}), uniform_cell(2, {2}), uniform_cell(2, {3})}, {Frac(1), Frac(3, 2), Frac(2)}));
  ms.push_back(HFamily::piecewise(cfg, {root_cell(cfg)}, {Frac(4)}));
  const HFamily fam(cfg, ms, Frac(2));
  const auto j = io::family_json(fam);
  const auto back = io::parse_family(json::parse(j.dump()));
  EXPECT_EQ(back.size(), 2u);
  EXPECT_EQ(back.declared_c(), Frac(2));
  EXPECT_EQ(io::family_json(back).dump(), j.dump());
  for (std::size_t m = 0; m < 2; ++m) {
    EXPECT_EQ(back.member(m).h.refined(3).values(), fam.member(m).h.refined(3).values());
  }
}

TEST(FamilyIo, ErrorsNameTheField) {
  const std::string grid = R"("grid":{"dims":1,"seqs":[[2,2]],"depth":2})";
  EXPECT_EQ(field_of([&] {
              io::parse_family(json::parse("{" + grid + R"(,"members":[{"pieces":[{"cell":{"ranks":[1],"index":[0]},"value":[1,1]}]}]})"));
            }),
            "members[0].pieces");
  EXPECT_EQ(field_of([&] {
              io::parse_family(json::parse("{" + grid + R"(,"members":[{"pieces":[{"cell":{"ranks":[0],"index":[0]},"value":[-1,1]}]}]})"));
            }),
            "members[0].pieces[0].value");
  EXPECT_EQ(field_of([&] {
              io::parse_family(json::parse("{" + grid + R"(,"members":[{"pieces":[{"cell":{"ranks":[1],"index":[5]},"value":[1,1]}]}]})"));
            }),
            "members[0].pieces[0].cell");
  EXPECT_EQ(field_of([&] { io::parse_family(json::parse("{" + grid + R"(,"members":[]})")); }), "members");
}

TEST(FileIo, MissingAndMalformedFiles) {
  EXPECT_THROW(io::read_json_file("/nonexistent/file.json"), std::runtime_error);
  const auto path = (std::filesystem::temp_directory_path() / "padic_io_test_bad.json").string();
  io::write_text(path, "{ not json");
  EXPECT_THROW(io::read_json_file(path), io::FormatError);
  std::remove(path.c_str());
}

TEST(Tables, CsvRowsCarryExactBounds) {
  GridConfig cfg({BranchSeq({3})});
  const auto f = to_complex(tensor_haar_step(cfg, {1}));
  const auto csv = io::step_csv(f, 1, true);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "flat_index,cell_lo_1,cell_hi_1,re,im");
  EXPECT_NE(csv.find("1,1/3,2/3,"), std::string::npos);
}

TEST(Reports, RealValuesPrintIntegersCompactly) {
  EXPECT_EQ(io::real_json(3.0).dump(), "3");
  EXPECT_EQ(io::real_json(0.5).dump(), "0.5");
  EXPECT_EQ(io::value_json(Complex(1.0, -0.0)).dump(), "[1,0]");
}
