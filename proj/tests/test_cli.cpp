#include <lmdp/io.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path scratch = fs::temp_directory_path() / "lmdp_cli_test";

int run(const std::string& args) {
    const std::string cmd = std::string(LMDP_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string out_dir(const std::string& name) { return (scratch / name).string(); }

} // namespace

TEST(Cli, ConfigErrorsExitTwo) {
    EXPECT_EQ(run("solve --domain no-such-domain --out " + out_dir("e2a")), 2);
    EXPECT_EQ(run("solve --domain ring --method bogus --out " + out_dir("e2b")), 2);
    EXPECT_EQ(run("frobnicate"), 2);
}

TEST(Cli, NumericalErrorsExitThree) {
    fs::create_directories(scratch);
    const auto path = (scratch / "hot.json").string();
    lmdp::io::write_text(path, R"({"n_interior":1,"n_boundary":1,"lambda":1,"r_i":[1000],"r_b":[0],"passive":[[0,0,0.5],[0,1,0.5]]})");
    EXPECT_EQ(run("solve --domain " + path + " --out " + out_dir("e3")), 3);
}

TEST(Cli, NonConvergenceExitsFour) {
    EXPECT_EQ(run("solve --domain ring --method z-iter --max-iter 2 --out " + out_dir("e4")), 4);
    EXPECT_TRUE(fs::exists(scratch / "e4" / "manifest.json"));
}

TEST(Cli, RerunsAreByteIdentical) {
    const std::string cmds[] = {
        "solve --domain ring --method z-iter",
        "blend --domain arm",
        "stack --domain four-rooms",
        "simulate --domain four-rooms --episodes 3 --seed 5",
    };
    int k = 0;
    for (const auto& c : cmds) {
        const std::string a = out_dir("rep" + std::to_string(k) + "a");
        const std::string b = out_dir("rep" + std::to_string(k) + "b");
        ++k;
        ASSERT_EQ(run(c + " --out " + a), 0) << c;
        ASSERT_EQ(run(c + " --out " + b), 0) << c;
        for (const auto& e : fs::directory_iterator(a)) {
            const auto name = e.path().filename();
            EXPECT_EQ(lmdp::io::read_text(e.path().string()), lmdp::io::read_text((fs::path(b) / name).string()))
                << c << " " << name;
        }
    }
}
