#include <gtest/gtest.h>

#include <sstream>

#include "temp_dir.hpp"
#include "tfn/errors.hpp"
#include "tfn_cli/cli.hpp"
#include "tfn_cli/config.hpp"

using namespace tfn::cli;

namespace {

struct Outcome {
    int code;
    std::string out, err;
};

Outcome tfn_run(std::vector<std::string> args) {
    args.insert(args.begin(), "tfn");
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

const std::vector<std::string> kSmall = {"--samples-per-class", "6", "--sample-length", "256"};

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

}  // namespace

TEST(Config, ParsesKeyValueLines) {
    const Config c = Config::parse("# comment\nepochs = 20\n\nbands = 0.1:0.2, 0.3:0.4\n", "x.cfg");
    EXPECT_EQ(c.count("epochs"), 20u);
    EXPECT_EQ(c.list("bands"), (std::vector<std::string>{"0.1:0.2", "0.3:0.4"}));
    try {
        Config::parse("epochs = 1\nno equals here\n", "x.cfg");
        FAIL();
    } catch (const tfn::ParseError& e) {
        EXPECT_EQ(e.location(), 2u);
    }
    Config d;
    d.set("epochs", "ten");
    EXPECT_THROW(d.count("epochs"), ConfigError);
    d.set("seed", "1,2,3");
    EXPECT_EQ(d.seeds("seed"), (std::vector<std::uint64_t>{1, 2, 3}));
}

TEST(Cli, HelpAndUsage) {
    EXPECT_EQ(tfn_run({"--help"}).code, kExitOk);
    EXPECT_EQ(tfn_run({}).code, kExitUsage);
    EXPECT_EQ(tfn_run({"bogus"}).code, kExitUsage);
    EXPECT_EQ(tfn_run({"gen-data"}).code, kExitUsage);  // --out is required
}

TEST(Cli, GenDataDefaultSplitAndDeterminism) {
    TempDir dir("cli_gen");
    const auto a = tfn_run({"gen-data", "--out", (dir / "a").string(), "--seed", "7"});
    ASSERT_EQ(a.code, kExitOk) << a.err;
    EXPECT_NE(a.out.find("train: 600 samples, test: 400 samples"), std::string::npos);
    ASSERT_EQ(tfn_run({"gen-data", "--out", (dir / "b").string(), "--seed", "7"}).code, kExitOk);
    for (const char* f : {"train/samples.f64le", "train/labels.u32le", "train/meta.json", "test/samples.f64le"})
        EXPECT_EQ(read_file(dir / "a" / f), read_file(dir / "b" / f)) << f;

    const auto again = tfn_run({"gen-data", "--out", (dir / "a").string(), "--seed", "7"});
    EXPECT_EQ(again.code, kExitConfig);
    EXPECT_EQ(tfn_run({"gen-data", "--out", (dir / "a").string(), "--seed", "8", "--force"}).code, kExitOk);
    EXPECT_NE(read_file(dir / "a" / "train/samples.f64le"), read_file(dir / "b" / "train/samples.f64le"));
}

TEST(Cli, ConfigErrorsNameTheKey) {
    TempDir dir("cli_err");
    auto r = tfn_run({"gen-data", "--out", (dir / "a").string(), "--bands", "0.3:0.1"});
    EXPECT_EQ(r.code, kExitConfig);
    EXPECT_NE(r.err.find("bands"), std::string::npos);

    write_file(dir / "bad.cfg", "epochs = 3\nwhatever = 1\n");
    r = tfn_run({"train", "--out", (dir / "b").string(), "--config", (dir / "bad.cfg").string()});
    EXPECT_EQ(r.code, kExitConfig);
    EXPECT_NE(r.err.find("whatever"), std::string::npos);

    r = tfn_run({"train", "--out", (dir / "c").string(), "--mode", "sideways"});
    EXPECT_EQ(r.code, kExitConfig);
    EXPECT_NE(r.err.find("mode"), std::string::npos);

    r = tfn_run({"freq-response", "--out", (dir / "d").string(), "--checkpoint", (dir / "nope.tfn").string()});
    EXPECT_EQ(r.code, kExitConfig);
}

TEST(Cli, TrainEvalFreqResponseExport) {
    TempDir dir("cli_train");
    const auto cfg = dir / "run.cfg";
    write_file(cfg, "epochs = 3\nbatch_size = 10\nsamples_per_class = 6\nsample_length = 256\nbackbone = lenet-1d\n");
    auto r = tfn_run({"train", "--out", (dir / "t").string(), "--config", cfg.string(), "--seed", "2"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_NE(r.out.find("final test accuracy"), std::string::npos);
    EXPECT_EQ(lines(read_file(dir / "t" / "history.csv")), 4u);
    EXPECT_EQ(lines(read_file(dir / "t" / "theta.csv")), 1u + 4u * 8u);
    const auto ckpt = (dir / "t" / "checkpoint.tfn").string();

    r = tfn_run({"train", "--out", (dir / "t2").string(), "--config", cfg.string(), "--seed", "2"});
    ASSERT_EQ(r.code, kExitOk);
    EXPECT_EQ(read_file(dir / "t" / "history.csv"), read_file(dir / "t2" / "history.csv"));

    r = tfn_run({"train", "--out", (dir / "bb").string(), "--config", cfg.string(), "--mode", "backbone-only"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_FALSE(std::filesystem::exists(dir / "bb" / "theta.csv"));

    r = tfn_run({"eval", "--out", (dir / "e").string(), "--checkpoint", ckpt, "--config", cfg.string(), "--seed", "2"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_TRUE(std::filesystem::exists(dir / "e" / "separability.txt"));
    const std::string reps = read_file(dir / "e" / "representations.csv");
    EXPECT_EQ(lines(reps), 1u + 5u * 6u - 5u * 4u);  // test split holds 2 per class at fraction 0.6

    r = tfn_run({"freq-response", "--out", (dir / "f").string(), "--checkpoint", ckpt, "--bands", "0.04:0.06,0.16:0.2"});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(lines(read_file(dir / "f" / "ofr.csv")), 514u);
    EXPECT_EQ(lines(read_file(dir / "f" / "cfr.csv")), 1u + 8u * 513u);
    EXPECT_NE(read_file(dir / "f" / "band_report.txt").find("hits"), std::string::npos);

    r = tfn_run({"freq-response", "--out", (dir / "g").string(), "--checkpoint", ckpt, "--fft-len", "32"});
    EXPECT_EQ(r.code, kExitConfig);
    EXPECT_NE(r.err.find("fft_len"), std::string::npos);

    r = tfn_run({"export-kernels", "--out", (dir / "k").string(), "--checkpoint", ckpt});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(lines(read_file(dir / "k" / "kernels.csv")), 1u + 8u * 51u);

    r = tfn_run({"export-kernels", "--out", (dir / "k2").string(), "--checkpoint", ckpt, "--before", ckpt});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(read_file(dir / "k2" / "before_kernels.csv"), read_file(dir / "k2" / "after_kernels.csv"));

    r = tfn_run({"export-kernels", "--out", (dir / "k3").string(), "--checkpoint",
                 (dir / "bb" / "checkpoint.tfn").string()});
    EXPECT_EQ(r.code, kExitRuntime);
}

TEST(Cli, MorletExportHas301Taps) {
    TempDir dir("cli_morlet");
    auto r = tfn_run(with({"train", "--out", (dir / "t").string(), "--family", "morlet", "--channels", "2",
                           "--epochs", "1", "--batch-size", "10", "--backbone", "lenet-1d"},
                          kSmall));
    ASSERT_EQ(r.code, kExitOk) << r.err;
    r = tfn_run({"export-kernels", "--out", (dir / "k").string(), "--checkpoint", (dir / "t" / "checkpoint.tfn").string()});
    ASSERT_EQ(r.code, kExitOk) << r.err;
    EXPECT_EQ(lines(read_file(dir / "k" / "kernels.csv")), 1u + 2u * 301u);
}

TEST(Cli, AblateWritesTable) {
    TempDir dir("cli_abl");
    const auto r = tfn_run(with({"ablate", "--out", (dir / "a").string(), "--modes", "backbone-only,tfn-add",
                                 "--seed", "0,1", "--epochs", "1", "--batch-size", "10", "--backbone", "lenet-1d",
                                 "--channels", "2"},
                                kSmall));
    ASSERT_EQ(r.code, kExitOk) << r.err;
    const std::string table = read_file(dir / "a" / "ablation.csv");
    EXPECT_EQ(lines(table), 3u);
    EXPECT_NE(table.find("backbone-only,-,"), std::string::npos);
    EXPECT_EQ(lines(read_file(dir / "a" / "cells.csv")), 5u);
    EXPECT_TRUE(std::filesystem::exists(dir / "a" / "cells" / "tfn-add_sttf_seed1" / "history.csv"));

    const auto bad = tfn_run(with({"ablate", "--out", (dir / "b").string(), "--modes", "backbone-only,tfn-add",
                                   "--families", "random", "--seed", "0", "--epochs", "1", "--batch-size", "10",
                                   "--backbone", "lenet-1d"},
                                  kSmall));
    EXPECT_EQ(bad.code, kExitRuntime);
    EXPECT_EQ(lines(read_file(dir / "b" / "ablation.csv")), 2u);
}
