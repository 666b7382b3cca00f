#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mvap/nn/checkpoint.hpp"

using namespace mvap;
using namespace mvap::nn;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& name) {
  return (fs::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

Tensor<float> random_batch(Shape s, Rng& rng) {
  Tensor<float> t(s);
  for (auto& v : t.data) v = static_cast<float>(rng.uniform(0.0, 1.0));
  return t;
}

}  // namespace

TEST_CASE("save/load round-trip preserves predictions bit for bit") {
  Network<float> net(parse_network_spec("tiny-cnn-a"), {1, 3, 32, 32});
  Rng rng(2025);
  net.init_params(rng);
  // Make batchnorm running statistics non-default.
  Tensor<float> warm = random_batch({8, 3, 32, 32}, rng);
  Rng drop(1);
  std::vector<int> labels(8, 3);
  net.loss_and_grads(warm, labels, drop);

  const Tensor<float> batch = random_batch({5, 3, 32, 32}, rng);
  const auto before = net.predict(batch);

  CheckpointMeta meta;
  meta.seed = 2025;
  meta.epochs = 1;
  meta.train_loss = 2.0;
  const std::string path = temp_path("mvap_ckpt_roundtrip.ckpt");
  save_checkpoint(net, meta, path);

  LoadedCheckpoint loaded = load_checkpoint(path);
  CHECK(loaded.meta.seed == 2025);
  CHECK(loaded.meta.epochs == 1);
  CHECK(loaded.net.spec().canonical() == net.spec().canonical());

  const auto after = loaded.net.predict(batch);
  REQUIRE(after.size() == before.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(after[i].class_id == before[i].class_id);
    CHECK(after[i].confidence == before[i].confidence);  // exact
  }

  // Saving the loaded net reproduces the same bytes.
  const std::string path2 = temp_path("mvap_ckpt_roundtrip2.ckpt");
  save_checkpoint(loaded.net, meta, path2);
  CHECK(slurp(path) == slurp(path2));

  CHECK(checkpoint_arch(path) == net.spec().canonical());
  fs::remove(path);
  fs::remove(path2);
}

TEST_CASE("header bookkeeping is enforced") {
  Network<float> net(parse_network_spec("flatten-dense(9)"), {1, 1, 4, 4});
  Rng rng(7);
  net.init_params(rng);
  const std::string path = temp_path("mvap_ckpt_corrupt.ckpt");
  save_checkpoint(net, CheckpointMeta{}, path);

  const std::string good = slurp(path);

  SUBCASE("truncated blob") {
    write_text_file(path, good.substr(0, good.size() - 2));
    CHECK_THROWS_AS(load_checkpoint(path), ParseError);
  }
  SUBCASE("trailing garbage") {
    write_text_file(path, good + "xx");
    CHECK_THROWS_AS(load_checkpoint(path), ParseError);
  }
  SUBCASE("bad magic") {
    std::string bad = good;
    bad[0] = 'X';
    write_text_file(path, bad);
    CHECK_THROWS_AS(load_checkpoint(path), ParseError);
  }
  SUBCASE("tensor size lies") {
    std::string bad = good;
    const auto pos = bad.find("tensor L1.weight 144");
    REQUIRE(pos != std::string::npos);
    bad.replace(pos, std::string("tensor L1.weight 144").size(),
                "tensor L1.weight 143");
    write_text_file(path, bad);
    CHECK_THROWS_AS(load_checkpoint(path), ParseError);
  }
  fs::remove(path);
}

TEST_CASE("missing file is a parse error naming the path") {
  CHECK_THROWS_WITH_AS(load_checkpoint("/nonexistent/nope.ckpt"),
                       doctest::Contains("nope.ckpt"), ParseError);
}
