#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

const char* cli_path() { return FINSLER_CLI_PATH; }

std::filesystem::path work_dir() {
  const std::filesystem::path dir{FINSLER_WORK_DIR};
  std::filesystem::create_directories(dir);
  return dir;
}

RunResult run(const std::string& args, const std::string& env = "") {
  std::string cmd;
  if (!env.empty()) cmd += env + " ";
  cmd += std::string("\"") + cli_path() + "\" " + args + " 2>&1";
  RunResult result;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf;
  size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
    result.output.append(buf.data(), n);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("validate passes for every built-in model") {
  for (const char* name : {"heisenberg", "sol2", "sol3"}) {
    const RunResult r =
        run(std::string("validate --model builtin:") + name);
    CAPTURE(r.output);
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("all checks passed") != std::string::npos);
    CHECK(r.output.find("metric-symmetry") != std::string::npos);
  }
}

TEST_CASE("check-berwald accepts the rescaled-parallel example") {
  const RunResult r =
      run("check-berwald --model builtin:sol2 --X \"1,0\" --f \"ln(y)\"");
  CAPTURE(r.output);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("berwald/criterion") != std::string::npos);
  CHECK(r.output.find("berwald/spray-witness") != std::string::npos);
  CHECK(r.output.find("all checks passed") != std::string::npos);
}

TEST_CASE("check-berwald rejects the unrescaled pair") {
  const RunResult r =
      run("check-berwald --model builtin:sol2 --X \"1,0\" --f \"0\"");
  CAPTURE(r.output);
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("1.0000e+00") != std::string::npos);
  CHECK(r.output.find("FAILED") != std::string::npos);
}

TEST_CASE("check-douglas flags the heisenberg center field") {
  const RunResult r =
      run("check-douglas --model builtin:heisenberg --X \"0,0,1\" --f \"0\"");
  CAPTURE(r.output);
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("douglas/criterion") != std::string::npos);
  CHECK(r.output.find("1.0000e+00") != std::string::npos);
}

TEST_CASE("check-douglas accepts a solved pair system") {
  const RunResult r = run(
      "check-douglas --model builtin:heisenberg --X \"2,1,0\" "
      "--f \"x + y/2\"");
  CAPTURE(r.output);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("douglas/reduced-system") != std::string::npos);
  CHECK(r.output.find("all checks passed") != std::string::npos);
}

TEST_CASE("check-douglas requires a randers-type family") {
  const RunResult r = run(
      "check-douglas --model builtin:heisenberg --X \"0,0,1\" --f \"0\" "
      "--phi matsumoto");
  CAPTURE(r.output);
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("error:") != std::string::npos);
}

TEST_CASE("flag-curvature reports the hyperbolic value") {
  const RunResult r = run(
      "flag-curvature --model builtin:sol2 --phi riemannian "
      "--at \"0,1\" --y \"1,0\" --u \"0,1\" --method both");
  CAPTURE(r.output);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("flag-curvature/spray") != std::string::npos);
  CHECK(r.output.find("flag-curvature/closed-form") != std::string::npos);
  CHECK(r.output.find("flag-curvature/orthonormal-form") != std::string::npos);
  CHECK(r.output.find("-1.0000e+00") != std::string::npos);
}

TEST_CASE("curvature samples sectional values") {
  const RunResult r = run("curvature --model builtin:sol3 --samples 5");
  CAPTURE(r.output);
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("sectional/point-000") != std::string::npos);
  CHECK(r.output.find("-1.0000e+00") != std::string::npos);
}

TEST_CASE("emit-model round-trips through validate") {
  const auto dir = work_dir();
  const auto file = dir / "sol3.json";
  const RunResult emit =
      run("emit-model --model builtin:sol3 --out " + file.string());
  CAPTURE(emit.output);
  REQUIRE(emit.exit_code == 0);

  const std::string text = slurp(file);
  CHECK(text.find("\"name\": \"sol3\"") != std::string::npos);

  const RunResult validate = run("validate --model " + file.string());
  CAPTURE(validate.output);
  CHECK(validate.exit_code == 0);
  CHECK(validate.output.find("all checks passed") != std::string::npos);

  const RunResult stream = run("emit-model --model builtin:sol3");
  CHECK(stream.exit_code == 0);
  CHECK(stream.output == text);
}

TEST_CASE("json reports are deterministic and record the seed") {
  const auto dir = work_dir();
  const auto a = dir / "a.json";
  const auto b = dir / "b.json";
  const auto c = dir / "c.json";

  REQUIRE(run("validate --model builtin:sol2 --out " + a.string()).exit_code ==
          0);
  REQUIRE(run("validate --model builtin:sol2 --out " + b.string()).exit_code ==
          0);
  CHECK(slurp(a) == slurp(b));

  REQUIRE(run("validate --model builtin:sol2 --seed 99 --out " + c.string())
              .exit_code == 0);
  CHECK(slurp(a) != slurp(c));
  CHECK(slurp(c).find("\"seed\": 99") != std::string::npos);
}

TEST_CASE("the seed environment variable applies when no flag is given") {
  const auto dir = work_dir();
  const auto env_out = dir / "env.json";
  const auto flag_out = dir / "flag.json";

  REQUIRE(run("validate --model builtin:sol2 --out " + env_out.string(),
              "FINSLER_SEED=99")
              .exit_code == 0);
  CHECK(slurp(env_out).find("\"seed\": 99") != std::string::npos);

  REQUIRE(run("validate --model builtin:sol2 --seed 7 --out " +
                  flag_out.string(),
              "FINSLER_SEED=99")
              .exit_code == 0);
  CHECK(slurp(flag_out).find("\"seed\": 7") != std::string::npos);
}

TEST_CASE("bad inputs exit with code two") {
  CHECK(run("validate --model builtin:nope").exit_code == 2);
  CHECK(run("check-berwald --model builtin:sol2 --X \"1,0\" --f \"ln(\"")
            .exit_code == 2);
  CHECK(run("check-berwald --model builtin:sol2 --X \"1,0,0\" --f \"0\"")
            .exit_code == 2);
  CHECK(run("flag-curvature --model builtin:sol2 --at \"0,1\" --y \"0,0\" "
            "--u \"0,1\"")
            .exit_code == 2);
  CHECK(run("nonsense").exit_code == 2);
  CHECK(run("validate").exit_code == 2);
}

TEST_CASE("help requests succeed") {
  CHECK(run("--help").exit_code == 0);
  CHECK(run("check-berwald --help").exit_code == 0);
}

TEST_CASE("check-paper prints one line per criterion") {
  const RunResult r = run("check-paper");
  CAPTURE(r.output);
  CHECK(r.exit_code == 0);
  for (int k = 1; k <= 10; ++k) {
    const std::string tag = "C" + std::to_string(k) + " ";
    CHECK(r.output.find(tag) != std::string::npos);
  }
  CHECK(r.output.find("pass") != std::string::npos);
}
