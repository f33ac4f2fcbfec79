#include <filesystem>
#include <fstream>

#include "alrank/manifest.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

using namespace alrank;
namespace fs = std::filesystem;

TEST_CASE("sha256 vectors") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("atomic write and file digest") {
  const auto dir = fs::temp_directory_path() / "alrank-manifest-test";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const auto path = dir / "out.txt";
  write_file_atomic(path, "first");
  write_file_atomic(path, "abc");
  CHECK(support::slurp(path.string()) == "abc");
  CHECK(file_digest(path) == sha256_hex("abc"));
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  CHECK(files == 1);
  fs::remove_all(dir);
}

TEST_CASE("manifest json") {
  RunManifest m;
  m.command = "select";
  m.config_hash = sha256_hex("{}");
  m.seed = 7;
  m.input_paths = {"scores.jsonl"};
  m.output_paths = {"batch.jsonl"};
  m.settings = "phi=3, K=ceil(N/20)=5";
  m.config_json = "{}";
  const auto j = nlohmann::json::parse(manifest_json(m));
  CHECK(j["command"] == "select");
  CHECK(j["seed"] == 7);
  CHECK(j["config_hash"] == m.config_hash);
  CHECK(j["engine_version"] == ALRANK_VERSION);
  CHECK(j["settings"] == m.settings);
  CHECK(j["input_paths"][0] == "scores.jsonl");
}
