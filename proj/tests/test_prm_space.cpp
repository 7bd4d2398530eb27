#include <gtest/gtest.h>

#include <cmath>

#include "lemur/error.hpp"
#include "lemur/hash.hpp"
#include "lemur/prm.hpp"
#include "lemur/space.hpp"
#include "lemur/rng.hpp"

namespace lemur {
namespace {

TEST(Sha256, MatchesFipsVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(NormalizeCode, StripsTrailingWhitespaceAndAddsNewline) {
  EXPECT_EQ(normalize_code("a  \nb\t"), "a\nb\n");
  EXPECT_EQ(normalize_code("x\n"), "x\n");
  EXPECT_EQ(normalize_code(""), "\n");
  EXPECT_EQ(code_id("def f():  \n  return 1"), code_id("def f():\n  return 1\n"));
  EXPECT_NE(code_id("a\n"), code_id("b\n"));
}

TEST(FormatValue, RealsKeepTheirType) {
  EXPECT_EQ(format_value(ParamValue{1.0}), "1.0");
  EXPECT_EQ(format_value(ParamValue{0.1}), "0.1");
  EXPECT_EQ(format_value(ParamValue{std::int64_t{16}}), "16");
  EXPECT_EQ(format_value(ParamValue{std::string("flip")}), "flip");
  EXPECT_TRUE(std::holds_alternative<double>(parse_value("1.0")));
  EXPECT_TRUE(std::holds_alternative<std::int64_t>(parse_value("16")));
  EXPECT_TRUE(std::holds_alternative<std::string>(parse_value("flip")));
}

TEST(PrmKv, SortedAndRoundTrips) {
  PrmMap p{{"momentum", 0.9}, {"batch", std::int64_t{16}}, {"lr", 0.01}, {"transform", std::string("flip")}};
  const std::string kv = format_prm_kv(p);
  EXPECT_EQ(kv, "batch=16;lr=0.01;momentum=0.9;transform=flip");
  EXPECT_EQ(parse_prm_kv(kv), p);
  EXPECT_TRUE(parse_prm_kv("").empty());
  EXPECT_THROW(parse_prm_kv("novalue"), MalformedDocument);
  EXPECT_THROW(parse_prm_kv("=1"), MalformedDocument);
}

TEST(PrmHash, CanonicalSerialization) {
  PrmMap a{{"lr", 0.01}, {"batch", std::int64_t{16}}};
  EXPECT_EQ(canonical_json(a), R"({"batch":16,"lr":0.01})");
  EXPECT_EQ(prm_hash(a), sha256_hex(R"({"batch":16,"lr":0.01})"));
  PrmMap b{{"batch", std::int64_t{16}}, {"lr", 0.01}};
  EXPECT_EQ(prm_hash(a), prm_hash(b));
  PrmMap c{{"batch", 16.0}, {"lr", 0.01}};
  EXPECT_NE(prm_hash(a), prm_hash(c));
  EXPECT_EQ(prm_hash(a).size(), 64u);
}

TEST(PrmValidation, RejectsBadEntries) {
  EXPECT_THROW(validate_prm({{"lr", std::nan("")}}), MalformedDocument);
  EXPECT_THROW(validate_prm({{"lr", INFINITY}}), MalformedDocument);
  EXPECT_THROW(validate_prm({{"a=b", 1.0}}), MalformedDocument);
  EXPECT_THROW(validate_prm({{"t", std::string("12")}}), MalformedDocument);
  EXPECT_THROW(validate_prm({{"t", std::string("a;b")}}), MalformedDocument);
  EXPECT_NO_THROW(validate_prm({{"t", std::string("flip")}}));
  EXPECT_THROW(prm_from_json(nlohmann::json::parse(R"({"a":[1]})")), MalformedDocument);
  EXPECT_THROW(prm_from_json(nlohmann::json::array()), MalformedDocument);
}

PrmMap random_prm(Rng& rng) {
  PrmMap p;
  const auto n = rng.uniform_int(0, 6);
  for (std::int64_t i = 0; i < n; ++i) {
    const std::string key = "k" + std::to_string(rng.uniform_int(0, 20));
    switch (rng.uniform_int(0, 2)) {
      case 0: {
        // Wide dynamic range, including subnormal-adjacent and huge reals.
        const double mag = std::pow(10.0, rng.uniform(-300, 300));
        p[key] = rng.uniform01() < 0.5 ? -mag : mag;
        break;
      }
      case 1: p[key] = static_cast<std::int64_t>(rng.next()); break;
      default: p[key] = "tok" + std::to_string(rng.next() % 1000); break;
    }
  }
  return p;
}

TEST(PrmProperty, KvAndJsonRoundTripExactly) {
  Rng rng(21);
  for (int i = 0; i < 2000; ++i) {
    const PrmMap p = random_prm(rng);
    EXPECT_EQ(parse_prm_kv(format_prm_kv(p)), p);
    EXPECT_EQ(prm_from_json(nlohmann::json::parse(canonical_json(p))), p);
    EXPECT_EQ(prm_hash(prm_from_json(nlohmann::json::parse(canonical_json(p)))), prm_hash(p));
  }
}

TEST(Space, ValidateRejectsInvalidSpecs) {
  EXPECT_THROW(validate(ParamSpec{LogUniform{0.0, 1.0}}), InvalidRange);
  EXPECT_THROW(validate(ParamSpec{LogUniform{1.0, 0.5}}), InvalidRange);
  EXPECT_THROW(validate(ParamSpec{Uniform{1.0, 0.0}}), InvalidRange);
  EXPECT_THROW(validate(ParamSpec{IntPow2{3, 2}}), InvalidRange);
  EXPECT_THROW(validate(ParamSpec{Categorical{{}}}), EmptyChoiceSet);
  EXPECT_NO_THROW(validate(ParamSpec{Uniform{0.5, 0.5}}));
}

TEST(Space, ConformsChecksTypeAndDomain) {
  EXPECT_TRUE(conforms(ParamSpec{LogUniform{1e-4, 1}}, ParamValue{1e-3}));
  EXPECT_FALSE(conforms(ParamSpec{LogUniform{1e-4, 1}}, ParamValue{2.0}));
  EXPECT_FALSE(conforms(ParamSpec{Uniform{0, 1}}, ParamValue{std::int64_t{0}}));
  EXPECT_TRUE(conforms(ParamSpec{IntPow2{2, 7}}, ParamValue{std::int64_t{128}}));
  EXPECT_FALSE(conforms(ParamSpec{IntPow2{2, 7}}, ParamValue{std::int64_t{256}}));
  EXPECT_FALSE(conforms(ParamSpec{IntPow2{2, 7}}, ParamValue{std::int64_t{12}}));
  EXPECT_FALSE(conforms(ParamSpec{IntPow2{0, 7}}, ParamValue{std::int64_t{0}}));
  EXPECT_TRUE(conforms(ParamSpec{Categorical{{"a", "b"}}}, ParamValue{std::string("b")}));
  EXPECT_FALSE(conforms(ParamSpec{Categorical{{"a", "b"}}}, ParamValue{std::string("c")}));
  const SearchSpace s{{"lr", LogUniform{1e-4, 1}}, {"batch", IntPow2{0, 3}}};
  EXPECT_TRUE(conforms(s, PrmMap{{"lr", 0.1}, {"batch", std::int64_t{4}}}));
  EXPECT_FALSE(conforms(s, PrmMap{{"lr", 0.1}}));
  EXPECT_FALSE(conforms(s, PrmMap{{"lr", 0.1}, {"batch", std::int64_t{4}}, {"x", 1.0}}));
}

TEST(Space, JsonRoundTrip) {
  const SearchSpace s{{"lr", LogUniform{1e-4, 1}},
                      {"batch", IntPow2{2, 7}},
                      {"momentum", Uniform{0, 0.99}},
                      {"transform", Categorical{{"flip", "identity"}}}};
  EXPECT_EQ(space_from_json(space_to_json(s)), s);
  EXPECT_EQ(space_from_json(nlohmann::json::parse(space_to_json(s).dump())), s);
}

}  // namespace
}  // namespace lemur
