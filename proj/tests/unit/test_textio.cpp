#include <doctest.h>

#include <filesystem>

#include "uadrive/error.hpp"
#include "uadrive/textio.hpp"

using namespace uadrive;
using namespace uadrive::textio;

TEST_CASE("formatting") {
  CHECK(format_sig9(0.1) == "0.1");
  CHECK(format_sig9(-0.0) == "0");
  CHECK(format_sig9(1.0 / 3.0) == "0.333333333");
  CHECK(format_decimal(100.0) == "100.0");
  CHECK(format_decimal(0.5) == "0.5");
  CHECK(parse_double(format_exact(0.1 + 0.2)) == 0.1 + 0.2);
}

TEST_CASE("quantize9 is idempotent and survives a text round trip") {
  for (double v : {0.123456789123, -0.98765432101, 1e-7, 42.0}) {
    const double q = quantize9(v);
    CHECK(quantize9(q) == q);
    CHECK(parse_double(format_sig9(q)) == q);
  }
}

TEST_CASE("strict parsing") {
  CHECK(parse_double(" 1.5 ") == 1.5);
  CHECK(parse_int("-12") == -12);
  CHECK_THROWS_AS(parse_double("1.5x"), Error);
  CHECK_THROWS_AS(parse_double(""), Error);
  CHECK_THROWS_AS(parse_int("3.0"), Error);
  try {
    parse_double("abc");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedRow);
  }
}

TEST_CASE("split keeps empty fields") {
  const auto parts = split("a,,b,", ',');
  REQUIRE(parts.size() == 4);
  CHECK(parts[1].empty());
  CHECK(parts[3].empty());
}

TEST_CASE("content digest matches git blob ids") {
  // `printf 'hello\n' | git hash-object --stdin`
  CHECK(content_digest("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  CHECK(content_digest("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST_CASE("file round trip creates parent directories") {
  const auto dir = std::filesystem::temp_directory_path() / "uadrive_textio_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  write_file(dir / "x.txt", "abc");
  CHECK(read_file(dir / "x.txt") == "abc");
  CHECK_THROWS_AS(read_file(dir / "missing.txt"), Error);
  std::filesystem::remove_all(dir.parent_path());
}
