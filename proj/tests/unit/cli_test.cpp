#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include <sys/wait.h>
#include <unistd.h>

using std::string;
namespace fs = std::filesystem;

namespace {

struct Run {
  int status;
  string out;
};

Run run(const string& args) {
  const string cmd = string(BIOPROT_CLI) + " " + args + " 2>/dev/null";
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  string out;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), p)) out += buf.data();
  const int st = ::pclose(p);
  return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

struct Workdir {
  fs::path path;
  Workdir() {
    path = fs::temp_directory_path() / ("bioprot-cli-" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~Workdir() { fs::remove_all(path); }
  string operator/(const string& f) const { return (path / f).string(); }
};

}  // namespace

TEST_CASE("cli enroll, verify, revoke") {
  Workdir w;
  REQUIRE(run("gen-data --spec k=3,r=5,l=256,seed=4 --out " + (w / "all.csv")).status == 0);
  const string store = "--store " + (w / "store");
  const string opts = " --set l_r=32 --set n=60";
  const string data = w / "all.csv";

  auto r = run(store + " --seed 9" + opts + " enroll alice " + data + " --class c000");
  CHECK(r.status == 0);
  CHECK(r.out.rfind("ENROLLED alice", 0) == 0);

  r = run(store + " verify alice " + data + " --class c000 --index 3");
  CHECK(r.status == 0);
  CHECK(r.out == "ACCEPT\n");
  r = run(store + " verify alice " + data + " --class c001");
  CHECK(r.status == 1);
  CHECK(r.out == "REJECT\n");
  CHECK(run(store + " verify nobody " + data + " --class c001").status == 2);
  CHECK(run(store + " verify alice " + data).status == 3);  // several classes, none chosen

  r = run(store + " --seed 10 revoke alice --reissue " + data + " --class c000");
  CHECK(r.status == 0);
  CHECK(run(store + " verify alice " + data + " --class c000").status == 0);
  CHECK(run(store + " --seed 10 revoke alice --reissue " + data + " --class c000").status == 5);
  CHECK(run(store + " revoke alice").status == 0);
  CHECK(run(store + " verify alice " + data + " --class c000").status == 2);

  std::ofstream(w.path / "store" / "alice.2.nbt", std::ios::trunc) << "garbage";
  CHECK(run(store + " --seed 3" + opts + " enroll bob " + data + " --class c001").status == 0);
  std::fstream f(w.path / "store" / "bob.1.nbt", std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(30);
  f.put('\x7f');
  f.close();
  CHECK(run(store + " verify bob " + data + " --class c001").status == 4);
}

TEST_CASE("cli usage errors") {
  CHECK(run("").status == 2);
  CHECK(run("frobnicate").status == 2);
  CHECK(run("verify alice x.csv").status == 3);  // no store
  CHECK(run("--set nope=1 security").status == 3);
}

TEST_CASE("cli security report") {
  auto r = run("security --paper-kc rp=3772 --csv");
  CHECK(r.status == 0);
  CHECK(r.out.find("stage,Kc,strength_bits\n") == 0);
  CHECK(r.out.find("\nrandom_projection,3772,3771\n") != string::npos);
  r = run("security --paper-kc full=6800 --csv");
  CHECK(r.out.find("\nfull,6800,6799\n") != string::npos);
  r = run("--set n=256 --set rho=1 security --csv");
  CHECK(r.out.find("\nbda,256,255\n") != string::npos);
  CHECK(run("security --paper-kc rp=").status == 3);
}

TEST_CASE("cli eval and bench write reports") {
  Workdir w;
  const string common = "--seed 2 --set l=64 --set l_r=16 --set n=16 --set rho=1 --output " + w.path.string();
  auto r = run(common + " eval --dataset s=synthetic:k=3,r=3,l=64");
  REQUIRE(r.status == 0);
  std::ifstream stages(w / "s_stages.csv");
  string header;
  std::getline(stages, header);
  CHECK(header == "stage,genuine_mean,impostor_mean,count");
  CHECK(fs::exists(w / "s_binarizers.csv"));

  r = run(common + " bench --dataset a=synthetic:k=3,r=3,l=64 --dataset b=synthetic:k=2,r=3,l=64,seed=5");
  REQUIRE(r.status == 0);
  std::ifstream timing(w / "timing.csv");
  std::getline(timing, header);
  CHECK(header == "dataset,mean_ms,stddev_ms,count");
  CHECK(run(common + " bench --repetitions 2 --dataset a=synthetic:k=3,r=3,l=64").status == 3);
}
