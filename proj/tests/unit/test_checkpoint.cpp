#include <doctest.h>

#include <filesystem>

#include "uadrive/checkpoint.hpp"
#include "uadrive/error.hpp"
#include "uadrive/textio.hpp"

using namespace uadrive;
using namespace uadrive::checkpoint;

namespace {

ErrorCode error_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("dnn checkpoint round trip") {
  const nn::MlpArchitecture arch{{3, 4, 1}};
  DnnCheckpoint c{arch, nn::init_weights(arch, 2), 2};
  for (auto& w : c.weights) w = textio::quantize9(w);
  const auto text = to_text(c);
  CHECK(text.starts_with("model=dnn\nlayers=3,4,1\nseed=2\ndigest="));
  CHECK(peek_kind(text) == ModelKind::Dnn);
  const auto back = parse_dnn(text);
  CHECK(back.arch == arch);
  CHECK(back.weights == c.weights);
  CHECK(to_text(back) == text);
}

TEST_CASE("bnn checkpoint round trip") {
  const nn::MlpArchitecture arch{{2, 3, 1}};
  BnnCheckpoint c{arch, bnn::init_variational(arch, 1, 0.05), {1.5}, {0.02}, 1};
  for (auto& w : c.vp.mu) w = textio::quantize9(w);
  for (auto& w : c.vp.rho) w = textio::quantize9(w);
  const auto text = to_text(c);
  CHECK(peek_kind(text) == ModelKind::Bnn);
  const auto back = parse_bnn(text);
  CHECK(back.vp.mu == c.vp.mu);
  CHECK(back.vp.rho == c.vp.rho);
  CHECK(back.prior.sigma == 1.5);
  CHECK(back.like.noise_sigma == 0.02);
}

TEST_CASE("checkpoint validation") {
  const nn::MlpArchitecture arch{{3, 4, 1}};
  const auto text = to_text(DnnCheckpoint{arch, nn::init_weights(arch, 2), 2});
  auto tampered = text;
  tampered[tampered.size() - 2] = tampered[tampered.size() - 2] == '1' ? '2' : '1';
  CHECK(error_of([&] { parse_dnn(tampered); }) == ErrorCode::DigestMismatch);

  auto wrong_arch = text;
  wrong_arch.replace(wrong_arch.find("3,4,1"), 5, "3,5,1");
  CHECK(error_of([&] { parse_dnn(wrong_arch); }) == ErrorCode::DimensionMismatch);

  CHECK(error_of([&] { parse_bnn(text); }) == ErrorCode::MalformedRow);
  CHECK(error_of([&] { load_dnn("/nonexistent/model.ckpt"); }) == ErrorCode::MissingModel);
  CHECK(error_of([&] { to_text(DnnCheckpoint{arch, {1.0}, 0}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("files") {
  const auto dir = std::filesystem::temp_directory_path() / "uadrive_ckpt_test";
  const nn::MlpArchitecture arch{{2, 2, 1}};
  save(DnnCheckpoint{arch, nn::init_weights(arch, 1), 1}, dir / "m.ckpt");
  CHECK(peek_kind_file(dir / "m.ckpt") == ModelKind::Dnn);
  CHECK(load_dnn(dir / "m.ckpt").arch == arch);
  std::filesystem::remove_all(dir);
}
