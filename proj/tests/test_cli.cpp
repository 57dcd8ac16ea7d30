#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstring>
#include <fstream>
#include <sstream>
#include <thread>

#include "support/test_util.hpp"
#include "uarl/agents.hpp"

using namespace uarl;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

/// Runs the CLI to completion, capturing output.
RunResult run_cli(std::vector<std::string> args) {
    int out_pipe[2], err_pipe[2];
    REQUIRE(pipe(out_pipe) == 0);
    REQUIRE(pipe(err_pipe) == 0);

    pid_t pid = fork();
    REQUIRE(pid >= 0);
    if (pid == 0) {
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(err_pipe[1], STDERR_FILENO);
        close(out_pipe[0]);
        close(out_pipe[1]);
        close(err_pipe[0]);
        close(err_pipe[1]);
        std::vector<char*> argv;
        static std::string bin = UARL_CLI_PATH;
        argv.push_back(bin.data());
        for (auto& a : args) argv.push_back(a.data());
        argv.push_back(nullptr);
        execv(bin.c_str(), argv.data());
        _exit(127);
    }
    close(out_pipe[1]);
    close(err_pipe[1]);

    RunResult result;
    auto slurp = [](int fd, std::string& into) {
        char buf[4096];
        ssize_t n;
        while ((n = read(fd, buf, sizeof(buf))) > 0) into.append(buf, size_t(n));
        close(fd);
    };
    std::thread t_err([&] { slurp(err_pipe[0], result.err); });
    slurp(out_pipe[0], result.out);
    t_err.join();

    int status = 0;
    waitpid(pid, &status, 0);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

/// serve-plant child that stays up until killed; resolves the actual port
/// from the banner.
struct PlantProcess {
    pid_t pid = -1;
    int out_fd = -1;
    Endpoint endpoint;

    explicit PlantProcess(std::vector<std::string> extra_args = {}) {
        int out_pipe[2];
        REQUIRE(pipe(out_pipe) == 0);
        pid = fork();
        REQUIRE(pid >= 0);
        if (pid == 0) {
            dup2(out_pipe[1], STDOUT_FILENO);
            close(out_pipe[0]);
            close(out_pipe[1]);
            std::vector<std::string> args = {"serve-plant", "--endpoint", "127.0.0.1:0"};
            for (auto& a : extra_args) args.push_back(a);
            std::vector<char*> argv;
            static std::string bin = UARL_CLI_PATH;
            argv.push_back(bin.data());
            for (auto& a : args) argv.push_back(a.data());
            argv.push_back(nullptr);
            execv(bin.c_str(), argv.data());
            _exit(127);
        }
        close(out_pipe[1]);
        out_fd = out_pipe[0];

        // read the banner up to the "ready" line
        std::string banner;
        char c;
        while (banner.find("ready\n") == std::string::npos) {
            ssize_t n = read(out_fd, &c, 1);
            REQUIRE(n == 1);
            banner.push_back(c);
        }
        auto at = banner.find("listening on ");
        REQUIRE(at != std::string::npos);
        at += strlen("listening on ");
        auto end = banner.find(' ', at);
        endpoint = parse_endpoint(banner.substr(at, end - at));
    }

    ~PlantProcess() {
        if (pid > 0) {
            kill(pid, SIGTERM);
            int status;
            waitpid(pid, &status, 0);
        }
        if (out_fd >= 0) close(out_fd);
    }
};

std::string slurp_file(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string tmp_path(const std::string& name) {
    return "/tmp/uarl_cli_test_" + std::to_string(getpid()) + "_" + name;
}

}  // namespace

TEST_CASE("serve-plant: banner, ready line, graceful shutdown") {
    PlantProcess plant;
    CHECK(plant.endpoint.port != 0);

    // reachable and inspectable while up
    auto result = run_cli({"inspect", "--endpoint", plant.endpoint.to_string()});
    CHECK(result.exit_code == 0);
    CHECK(result.out.find("Action space: 4 (RotateTable×BeltDirection)") !=
          std::string::npos);
    CHECK(result.out.find("Observation space: 6 (LightBarrier×ColorInspection)") !=
          std::string::npos);
    CHECK(result.out.find("Turntable") != std::string::npos);
}

TEST_CASE("serve-plant: occupied port exits 2") {
    auto blocker = testutil::make_bare_server();
    auto result = run_cli({"serve-plant", "--endpoint",
                           blocker->endpoint().to_string()});
    CHECK(result.exit_code == 2);
    CHECK(result.err.find("error") != std::string::npos);
}

TEST_CASE("inspect: unreachable endpoint exits 3") {
    auto result = run_cli({"inspect", "--endpoint", "127.0.0.1:1"});
    CHECK(result.exit_code == 3);
}

TEST_CASE("inspect: markerless server exits 4") {
    auto bare = testutil::make_bare_server();
    auto result = run_cli({"inspect", "--endpoint", bare->endpoint().to_string()});
    CHECK(result.exit_code == 4);
}

TEST_CASE("train: writes artifacts and reports the learned policy") {
    PlantProcess plant({"--seed", "7"});
    auto log = tmp_path("eps.csv");
    auto qtable = tmp_path("q.csv");
    auto result = run_cli({"train", "--endpoint", plant.endpoint.to_string(),
                           "--episodes", "40", "--seed", "1", "--log", log,
                           "--qtable", qtable});
    REQUIRE(result.exit_code == 0);
    CHECK(result.out.find("greedy policy:") != std::string::npos);

    auto log_text = slurp_file(log);
    CHECK(log_text.rfind("episode,steps,return,outcome\n", 0) == 0);
    CHECK(std::count(log_text.begin(), log_text.end(), '\n') == 41);

    auto q = QLearningAgent::load_csv_file(qtable);
    CHECK(q.num_states() == 6);
    CHECK(q.num_actions() == 4);
}

TEST_CASE("train: identical invocations against identical plants are byte-identical") {
    auto log_a = tmp_path("eps_a.csv"), log_b = tmp_path("eps_b.csv");
    auto q_a = tmp_path("q_a.csv"), q_b = tmp_path("q_b.csv");
    {
        PlantProcess plant({"--seed", "21"});
        auto r = run_cli({"train", "--endpoint", plant.endpoint.to_string(),
                          "--episodes", "30", "--seed", "4", "--log", log_a,
                          "--qtable", q_a});
        REQUIRE(r.exit_code == 0);
    }
    {
        PlantProcess plant({"--seed", "21"});
        auto r = run_cli({"train", "--endpoint", plant.endpoint.to_string(),
                          "--episodes", "30", "--seed", "4", "--log", log_b,
                          "--qtable", q_b});
        REQUIRE(r.exit_code == 0);
    }
    CHECK(slurp_file(log_a) == slurp_file(log_b));
    CHECK(slurp_file(q_a) == slurp_file(q_b));
}

TEST_CASE("train: invalid hyperparameters exit 5 without touching the network") {
    auto result = run_cli({"train", "--endpoint", "127.0.0.1:1", "--gamma", "1.5"});
    CHECK(result.exit_code == 5);
    CHECK(result.err.find("gamma") != std::string::npos);
}

TEST_CASE("train: unreachable server exits 6") {
    auto result = run_cli({"train", "--endpoint", "127.0.0.1:1", "--episodes", "1"});
    CHECK(result.exit_code == 6);
}

TEST_CASE("config file loads and flags override it") {
    auto config_path = tmp_path("cfg.json");
    {
        std::ofstream out(config_path);
        out << R"({"agent": {"gamma": 0.5}, "episodes": 3})";
    }
    // the file alone is valid; the flag override pushes gamma out of range
    auto result = run_cli({"train", "--config", config_path, "--gamma", "1.5"});
    CHECK(result.exit_code == 5);

    auto bad = tmp_path("bad.json");
    {
        std::ofstream out(bad);
        out << "{nope";
    }
    auto parse_fail = run_cli({"train", "--config", bad});
    CHECK(parse_fail.exit_code == 5);
}

TEST_CASE("eval: zero table plays greedily and loses the material") {
    PlantProcess plant({"--seed", "3"});
    auto qtable = tmp_path("zeros.csv");
    QLearningAgent zeros(6, 4, 0.4, 0.9, 0.0, 1);
    zeros.save_csv_file(qtable);

    auto result = run_cli({"eval", "--endpoint", plant.endpoint.to_string(),
                           "--qtable", qtable, "--episodes", "100"});
    REQUIRE(result.exit_code == 0);
    // greedy-on-zeros always advances and drops: exactly -3 per episode
    CHECK(result.out.find("mean return: -3\n") != std::string::npos);
    CHECK(result.out.find("dropped=100") != std::string::npos);
}

TEST_CASE("eval: trained table earns +5 everywhere") {
    PlantProcess plant({"--seed", "9"});
    auto qtable = tmp_path("trained.csv");
    auto train = run_cli({"train", "--endpoint", plant.endpoint.to_string(),
                          "--episodes", "150", "--seed", "2", "--log",
                          tmp_path("tr_eps.csv"), "--qtable", qtable});
    REQUIRE(train.exit_code == 0);

    auto result = run_cli({"eval", "--endpoint", plant.endpoint.to_string(),
                           "--qtable", qtable, "--episodes", "100"});
    REQUIRE(result.exit_code == 0);
    CHECK(result.out.find("mean return: 5\n") != std::string::npos);
    CHECK(result.out.find("correct=100") != std::string::npos);
}

TEST_CASE("eval: dimension mismatch against the discovered spaces exits 5") {
    PlantProcess plant;
    auto qtable = tmp_path("wrong_dims.csv");
    QLearningAgent small(2, 2, 0.4, 0.9, 0.0, 1);
    small.save_csv_file(qtable);
    auto result = run_cli({"eval", "--endpoint", plant.endpoint.to_string(),
                           "--qtable", qtable, "--episodes", "5"});
    CHECK(result.exit_code == 5);
}
