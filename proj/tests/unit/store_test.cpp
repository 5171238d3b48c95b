#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "bioprot/error.hpp"
#include "bioprot/ingest.hpp"
#include "bioprot/pipeline.hpp"

using namespace bioprot;
namespace fs = std::filesystem;

namespace {

struct TempStore {
  fs::path path;
  TempStore() {
    path = fs::temp_directory_path() / ("bioprot-store-" + std::to_string(::getpid()));
    fs::remove_all(path);
  }
  ~TempStore() { fs::remove_all(path); }
};

EnrollmentRecord make_record(const std::string& user, std::uint64_t seed) {
  SystemConfig cfg;
  cfg.l = 32;
  cfg.l_r = 8;
  cfg.n = 20;
  const Dataset ds = generate_synthetic({1, 3, 32, 0.1, 1.0, seed});
  return enroll(user, ds.classes[0].samples, cfg, seed, {1700000000 + static_cast<std::int64_t>(seed), 1});
}

}  // namespace

TEST_CASE("store lifecycle") {
  TempStore tmp;
  TemplateStore store(tmp.path);
  const auto a = make_record("alice", 1);
  const auto b = make_record("bob", 2);

  CHECK(store.put(a) == "alice.1.nbt");
  store.put(b);
  CHECK(store.get("alice") == a);
  CHECK(store.get_bytes("alice") == serialize_record(a));

  const auto listed = store.list();
  REQUIRE(listed.size() == 2);
  CHECK(listed[0].user_id == "alice");
  CHECK(listed[0].status == RecordStatus::active);
  CHECK(listed[0].created == "2023-11-14T22:13:21Z");

  SUBCASE("missing user") {
    try {
      store.get("carol");
      FAIL("no error");
    } catch (const RevokedError&) {
      FAIL("not revoked");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::not_found);
    }
  }
  SUBCASE("revoke") {
    store.revoke("alice");
    CHECK_THROWS_AS(store.get("alice"), RevokedError);
    CHECK_THROWS_AS(store.get_file("alice", "alice.1.nbt"), RevokedError);
    CHECK(store.get("bob") == b);
  }
  SUBCASE("reissue supersedes") {
    const auto a2 = make_record("alice", 3);
    CHECK(store.put(a2) == "alice.2.nbt");
    CHECK(store.get("alice") == a2);
    CHECK_THROWS_AS(store.get_file("alice", "alice.1.nbt"), RevokedError);
    CHECK(store.entries().size() == 3);
  }
  SUBCASE("corrupt file on disk") {
    const auto file = tmp.path / "alice.1.nbt";
    const auto size = fs::file_size(file);
    fs::resize_file(file, size / 2);
    try {
      store.get("alice");
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::integrity);
    }
  }
  SUBCASE("reopen") {
    const TemplateStore again(tmp.path);
    CHECK(again.get("bob") == b);
  }
}

TEST_CASE("user ids") {
  validate_user_id("a.b-c_d@e");
  CHECK_THROWS_AS(validate_user_id(""), Error);
  CHECK_THROWS_AS(validate_user_id(".hidden"), Error);
  CHECK_THROWS_AS(validate_user_id("a/b"), Error);
  CHECK_THROWS_AS(validate_user_id(std::string(65, 'x')), Error);
}

TEST_CASE("rfc3339") {
  CHECK(format_rfc3339(0) == "1970-01-01T00:00:00Z");
  CHECK(format_rfc3339(951782400) == "2000-02-29T00:00:00Z");
}
