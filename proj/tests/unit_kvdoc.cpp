#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "siwsim/kvdoc.hpp"

using siwsim::kvdoc::Document;
using siwsim::kvdoc::Error;
using siwsim::kvdoc::format_double;

TEST_CASE("parse top-level entries, comments and blank lines") {
  auto doc = Document::parse(
      "# leading comment\n"
      "alpha = 1\n"
      "\n"
      "beta = two words  # trailing comment\n"
      "gamma=  spaced \n");
  CHECK(doc.sections().empty());
  CHECK(doc.top().get("alpha") == "1");
  CHECK(doc.top().get("beta") == "two words");
  CHECK(doc.top().get("gamma") == "spaced");
}

TEST_CASE("sections repeat and keep file order") {
  auto doc = Document::parse(
      "seed = 7\n"
      "[flow]\n"
      "src = 0\n"
      "[radio]\n"
      "tx_power_w = 0.28\n"
      "[flow]\n"
      "src = 3\n");
  auto flows = doc.find_sections("flow");
  REQUIRE(flows.size() == 2);
  CHECK(flows[0]->get_int("src") == 0);
  CHECK(flows[1]->get_int("src") == 3);
  CHECK(doc.find_section("radio") != nullptr);
  CHECK(doc.find_section("mac") == nullptr);
}

TEST_CASE("typed getters and fallbacks") {
  auto doc = Document::parse(
      "count = 42\n"
      "ratio = -2.5e-3\n"
      "flag = true\n"
      "off = 0\n");
  const auto& top = doc.top();
  CHECK(top.get_int("count") == 42);
  CHECK(top.get_double("ratio") == doctest::Approx(-2.5e-3));
  CHECK(top.get_bool("flag"));
  CHECK_FALSE(top.get_bool("off"));
  CHECK(top.get_int_or("missing", 9) == 9);
  CHECK(top.get_double_or("ratio", 0.0) == doctest::Approx(-2.5e-3));
  CHECK(top.get_or("missing", "d") == "d");
}

TEST_CASE("malformed input reports the line") {
  CHECK_THROWS_AS(Document::parse("novalue\n", "f.cfg"), Error);
  CHECK_THROWS_AS(Document::parse("[unclosed\n"), Error);
  CHECK_THROWS_AS(Document::parse("= bare\n"), Error);
  try {
    Document::parse("ok = 1\nbroken\n", "f.cfg");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("f.cfg:2") != std::string::npos);
  }
}

TEST_CASE("bad typed values name the key") {
  auto doc = Document::parse("x = abc\ny = 1.5\n");
  CHECK_THROWS_AS(doc.top().get_double("x"), Error);
  CHECK_THROWS_AS(doc.top().get_int("y"), Error);
  CHECK_THROWS_AS(doc.top().get_bool("x"), Error);
  CHECK_THROWS_AS(doc.top().get("missing"), Error);
}

TEST_CASE("serialize round-trips structure and order") {
  auto doc = Document::parse(
      "seed = 1\n"
      "duration_s = 120\n"
      "[flow]\n"
      "src = 0\n"
      "dst = 1\n");
  std::string text = doc.serialize();
  auto again = Document::parse(text);
  CHECK(again.serialize() == text);
  CHECK(text ==
        "seed = 1\n"
        "duration_s = 120\n"
        "\n"
        "[flow]\n"
        "src = 0\n"
        "dst = 1\n");
}

TEST_CASE("set replaces in place and preserves order") {
  auto doc = Document::parse("a = 1\nb = 2\n");
  doc.top().set("a", "9");
  CHECK(doc.serialize() == "a = 9\nb = 2\n");
}

TEST_CASE("format_double is shortest round-trip form") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(59.550818) == "59.550818");
  for (double v : {1.0 / 3.0, 2.398e9, 3.652e-10, 8.192e-3, 1e308, -0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}
