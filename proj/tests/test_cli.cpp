#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#ifndef STRNN_CLI_PATH
#error "STRNN_CLI_PATH must point at the built strnn binary"
#endif

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(STRNN_CLI_PATH) + " " + args + " 2>&1";
  Run r{-1, {}};
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() / ("strnn_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string p(const std::string& name) const { return (dir / name).string(); }
  // A 3x3 model small enough to train in well under a second.
  std::string config(std::size_t steps, std::size_t epochs) const {
    const auto path = p("run.cfg");
    std::ofstream(path) << "layout=3x3\ninput_dim=2\nsteps=" << steps
                        << "\nclasses=3\nsrnn_hidden=3\nsrnn_output=3\nkp=2\ntrnn_hidden=3\nlp=2\nepochs=" << epochs
                        << "\n";
    return " --config " + path;
  }
  fs::path dir;
};

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  std::istringstream in(s);
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST_F(Cli, SynthTrainEvalSaliency) {
  auto r = run("synth --out " + p("d.stv") + " --count 24 --classes 3 --height 3 --width 3 --steps 4 --depth 2 --seed 1");
  ASSERT_EQ(r.code, 0) << r.out;

  r = run("train --data " + p("d.stv") + " --out " + p("m.ckpt") + config(4, 3));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("epoch\tdata_loss\tpenalty\ttrain_acc"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(p("m.ckpt")));

  r = run("eval --checkpoint " + p("m.ckpt") + " --data " + p("d.stv"));
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("accuracy"), std::string::npos);
  EXPECT_NE(r.out.find("confusion"), std::string::npos);

  r = run("saliency --checkpoint " + p("m.ckpt") + " --out " + p("s.csv"));
  ASSERT_EQ(r.code, 0) << r.out;
  std::ifstream csv(p("s.csv"));
  std::stringstream ss;
  ss << csv.rdbuf();
  EXPECT_EQ(ss.str().rfind("cell,row,col,weight", 0), 0u);
  EXPECT_EQ(count_lines(ss.str()), 10u);
}

TEST_F(Cli, GradcheckPassesOnTinyProfile) {
  const auto r = run("gradcheck");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("PASS"), std::string::npos) << r.out;
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("train --profile nope --data x --out y").code, 1);
  EXPECT_EQ(run("eval --checkpoint " + p("missing.ckpt") + " --data " + p("missing.stv")).code, 2);
  EXPECT_EQ(run("gradcheck --tol 0").code, 3);
}

TEST_F(Cli, EvalRejectsMismatchedData) {
  ASSERT_EQ(run("synth --out " + p("a.stv") + " --count 6 --height 3 --width 3 --steps 4 --depth 2").code, 0);
  ASSERT_EQ(run("synth --out " + p("b.stv") + " --count 6 --height 3 --width 3 --steps 5 --depth 2").code, 0);
  ASSERT_EQ(run("train --data " + p("a.stv") + " --out " + p("m.ckpt") + config(4, 1)).code, 0);
  const auto r = run("eval --checkpoint " + p("m.ckpt") + " --data " + p("b.stv"));
  EXPECT_EQ(r.code, 2) << r.out;
}
