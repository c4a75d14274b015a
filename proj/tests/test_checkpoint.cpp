#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "tgode/checkpoint.hpp"
#include "tgode/errors.hpp"

using namespace tgode;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("roundtrip preserves names, shapes and values") {
  Param a("rec/x", Tensor(2, 3));
  for (std::size_t i = 0; i < a.value.v.size(); ++i) a.value.v[i] = 0.5 * i - 1.0;
  Param b("ode/w_a", Tensor(1, 4));
  b.value.v = {1, 2, 3, 4};
  std::string path = temp_path("tgode_ckpt_rt.bin");
  save_checkpoint(path, {&a, &b});

  Param a2("rec/x", Tensor(2, 3));
  Param b2("ode/w_a", Tensor(1, 4));
  load_checkpoint(path, {&a2, &b2});
  for (std::size_t i = 0; i < a.value.v.size(); ++i)
    CHECK(a2.value.v[i] == doctest::Approx(a.value.v[i]).epsilon(1e-6));
  CHECK(b2.value.v[3] == doctest::Approx(4.0));
}

TEST_CASE("magic string leads the file") {
  Param a("rec/x", Tensor(1, 1));
  std::string path = temp_path("tgode_ckpt_magic.bin");
  save_checkpoint(path, {&a});
  CHECK(slurp(path).rfind("TGODE1", 0) == 0);
}

TEST_CASE("saves are byte-reproducible") {
  Param a("diffusion/dec_w", Tensor(3, 3));
  for (std::size_t i = 0; i < 9; ++i) a.value.v[i] = std::sin(static_cast<double>(i));
  std::string p1 = temp_path("tgode_ckpt_a.bin");
  std::string p2 = temp_path("tgode_ckpt_b.bin");
  save_checkpoint(p1, {&a});
  save_checkpoint(p2, {&a});
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("read exposes raw entries") {
  Param a("codec/phi", Tensor(2, 2));
  a.value.v = {1, 2, 3, 4};
  std::string path = temp_path("tgode_ckpt_read.bin");
  save_checkpoint(path, {&a});
  auto entries = read_checkpoint(path);
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].name == "codec/phi");
  CHECK(entries[0].dims == std::vector<int>{2, 2});
  CHECK(entries[0].data[3] == doctest::Approx(4.0f));
}

TEST_CASE("missing parameter is a mismatch") {
  Param a("rec/x", Tensor(1, 2));
  std::string path = temp_path("tgode_ckpt_miss.bin");
  save_checkpoint(path, {&a});
  Param other("rec/y", Tensor(1, 2));
  CHECK_THROWS_AS(load_checkpoint(path, {&other}), MismatchError);
}

TEST_CASE("shape disagreement is a mismatch") {
  Param a("rec/x", Tensor(1, 2));
  std::string path = temp_path("tgode_ckpt_shape.bin");
  save_checkpoint(path, {&a});
  Param wide("rec/x", Tensor(1, 5));
  CHECK_THROWS_AS(load_checkpoint(path, {&wide}), MismatchError);
}

TEST_CASE("unreadable path is an io error") {
  Param a("rec/x", Tensor(1, 1));
  CHECK_THROWS_AS(load_checkpoint("/nonexistent/ckpt.bin", {&a}), IoError);
}

TEST_CASE("truncated file rejected") {
  std::string path = temp_path("tgode_ckpt_trunc.bin");
  std::ofstream(path, std::ios::binary) << "TGODE1\x05";
  Param a("rec/x", Tensor(1, 1));
  CHECK_THROWS(load_checkpoint(path, {&a}));
}
