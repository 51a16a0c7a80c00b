#include <gtest/gtest.h>

#include "temp_dir.hpp"
#include "tfn/data.hpp"
#include "tfn/errors.hpp"
#include "tfn/nn/checkpoint.hpp"
#include "tfn/nn/train.hpp"

using namespace tfn;
using namespace tfn::nn;

namespace {

Dataset small_data() {
    SynthSpec spec = synth_bearing5();
    spec.samples_per_class = 6;
    spec.sample_length = 256;
    return synth_generate(spec, 11);
}

Model trained(AssemblyMode mode, BackboneKind backbone, KernelFamily family) {
    ModelSpec s;
    s.mode = mode;
    s.backbone = backbone;
    s.family = family;
    s.tfconv_channels = 4;
    s.input_length = 256;
    Model m = assemble_model(s, 3);
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 10;
    train(m, small_data(), nullptr, cfg);
    return m;
}

}  // namespace

TEST(Checkpoint, RoundTripReproducesLogits) {
    const Dataset data = small_data();
    const std::vector<std::tuple<AssemblyMode, BackboneKind, KernelFamily>> cases = {
        {AssemblyMode::tfn_add, BackboneKind::paper_cnn, KernelFamily::sttf},
        {AssemblyMode::tfn_replace, BackboneKind::resnet_1d, KernelFamily::morlet},
        {AssemblyMode::wkn_add, BackboneKind::lenet_1d, KernelFamily::laplace},
        {AssemblyMode::backbone_only, BackboneKind::lenet_1d, KernelFamily::sttf},
        {AssemblyMode::random_tfn, BackboneKind::paper_cnn, KernelFamily::random},
    };
    TempDir dir("ckpt");
    for (const auto& [mode, backbone, family] : cases) {
        Model m = trained(mode, backbone, family);
        const auto path = dir / "m.tfn";
        save_checkpoint(m, path);
        Model back = load_checkpoint(path);
        EXPECT_EQ(back.spec(), m.spec());
        const Tensor a = m.forward(data.samples, false);
        const Tensor b = back.forward(data.samples, false);
        ASSERT_EQ(a.shape(), b.shape());
        EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin())) << to_string(mode);
        save_checkpoint(back, dir / "again.tfn");
        EXPECT_EQ(read_file(path), read_file(dir / "again.tfn"));
    }
}

TEST(Checkpoint, MalformedFilesThrowParseError) {
    TempDir dir("ckpt_bad");
    Model m = trained(AssemblyMode::tfn_add, BackboneKind::lenet_1d, KernelFamily::sttf);
    save_checkpoint(m, dir / "good.tfn");
    const std::string good = read_file(dir / "good.tfn");

    write_file(dir / "magic.tfn", "XXXX" + good.substr(4));
    EXPECT_THROW(load_checkpoint(dir / "magic.tfn"), ParseError);

    write_file(dir / "short.tfn", good.substr(0, good.size() - 9));
    EXPECT_THROW(load_checkpoint(dir / "short.tfn"), ParseError);

    write_file(dir / "long.tfn", good + "junk");
    EXPECT_THROW(load_checkpoint(dir / "long.tfn"), ParseError);

    EXPECT_THROW(load_checkpoint(dir / "missing.tfn"), std::runtime_error);
}

TEST(Checkpoint, OutOfBoxParametersAreRejected) {
    TempDir dir("ckpt_box");
    Model m = trained(AssemblyMode::tfn_add, BackboneKind::lenet_1d, KernelFamily::sttf);
    m.tfconv()->layer().params.values[0] = 0.75;
    save_checkpoint(m, dir / "bad.tfn");
    EXPECT_THROW(load_checkpoint(dir / "bad.tfn"), ParseError);
}
