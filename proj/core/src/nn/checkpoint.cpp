#include "tfn/nn/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <stdexcept>

#include "tfn/errors.hpp"

namespace tfn::nn {
namespace {

constexpr char kMagic[4] = {'T', 'F', 'N', '1'};

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot write " + path.string());
    }
    template <typename T>
    void put(T v) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
        out_.write(reinterpret_cast<const char*>(b), sizeof(T));
    }
    void str(std::string_view s) {
        put(static_cast<std::uint32_t>(s.size()));
        out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }
    void raw(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }

private:
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::filesystem::path& path) : path_(path.string()) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open " + path_);
        bytes_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    }
    template <typename T>
    T get() {
        need(sizeof(T));
        unsigned char b[sizeof(T)];
        std::memcpy(b, bytes_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
        pos_ += sizeof(T);
        T v;
        std::memcpy(&v, b, sizeof(T));
        return v;
    }
    std::string str() {
        const auto n = get<std::uint32_t>();
        need(n);
        std::string s(bytes_.data() + pos_, n);
        pos_ += n;
        return s;
    }
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) fail("unexpected end of file");
    }
    [[noreturn]] void fail(const std::string& what) const { throw ParseError(path_, pos_, what); }
    bool done() const { return pos_ == bytes_.size(); }
    std::size_t pos() const { return pos_; }

private:
    std::string path_;
    std::vector<char> bytes_;
    std::size_t pos_ = 0;
};

struct Block {
    std::vector<std::size_t> dims;
    std::vector<double> data;
};

}  // namespace

void save_checkpoint(Model& model, const std::filesystem::path& path) {
    Writer w(path);
    w.raw(kMagic, 4);
    const auto& spec = model.spec();
    w.str(to_string(spec.mode));
    w.str(to_string(spec.backbone));
    w.str(to_string(spec.family));
    w.put(static_cast<std::uint32_t>(spec.n_classes));
    w.put(static_cast<std::uint32_t>(spec.tfconv_channels));
    w.put(static_cast<std::uint32_t>(spec.input_length));

    const auto params = model.parameters();
    const auto buffers = model.buffers();
    w.put(static_cast<std::uint32_t>(params.size() + buffers.size()));
    auto block = [&](const std::string& name, const std::vector<std::size_t>& dims, std::span<const double> v) {
        w.str(name);
        w.put(static_cast<std::uint32_t>(dims.size()));
        for (auto d : dims) w.put(static_cast<std::uint64_t>(d));
        for (double x : v) w.put(x);
    };
    for (const auto& p : params) block(p.name, p.dims, p.value);
    for (const auto& b : buffers) block(b.name, b.dims, b.value);
}

Model load_checkpoint(const std::filesystem::path& path) {
    Reader r(path);
    r.need(4);
    for (char c : kMagic)
        if (r.get<char>() != c) throw ParseError(path.string(), 0, "not a TFN1 checkpoint");

    ModelSpec spec;
    try {
        spec.mode = parse_assembly_mode(r.str());
        spec.backbone = parse_backbone(r.str());
        spec.family = parse_kernel_family(r.str());
    } catch (const std::invalid_argument& e) {
        r.fail(e.what());
    }
    spec.n_classes = r.get<std::uint32_t>();
    spec.tfconv_channels = r.get<std::uint32_t>();
    spec.input_length = r.get<std::uint32_t>();

    std::map<std::string, Block> blocks;
    const auto count = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < count; ++i) {
        std::string name = r.str();
        Block b;
        const auto ndims = r.get<std::uint32_t>();
        if (ndims > 8) r.fail("block '" + name + "' has too many dimensions");
        std::size_t n = 1;
        for (std::uint32_t d = 0; d < ndims; ++d) {
            b.dims.push_back(static_cast<std::size_t>(r.get<std::uint64_t>()));
            n *= b.dims.back();
        }
        r.need(n * 8);
        b.data.resize(n);
        for (auto& x : b.data) x = r.get<double>();
        blocks.emplace(std::move(name), std::move(b));
    }
    if (!r.done()) r.fail("trailing bytes after last block");

    Model model = [&] {
        try {
            return assemble_model(spec, 0);
        } catch (const std::invalid_argument& e) {
            throw ParseError(path.string(), 0, std::string("invalid model header: ") + e.what());
        }
    }();

    std::size_t used = 0;
    auto restore = [&](const std::string& name, const std::vector<std::size_t>& dims, std::span<double> value) {
        const auto it = blocks.find(name);
        if (it == blocks.end()) throw ParseError(path.string(), 0, "missing block '" + name + "'");
        if (it->second.dims != dims) throw ParseError(path.string(), 0, "shape mismatch for block '" + name + "'");
        std::copy(it->second.data.begin(), it->second.data.end(), value.begin());
        ++used;
    };
    for (const auto& p : model.parameters()) restore(p.name, p.dims, p.value);
    for (const auto& b : model.buffers()) restore(b.name, b.dims, b.value);
    if (used != blocks.size()) throw ParseError(path.string(), 0, "checkpoint holds blocks the model does not use");
    if (const TfConv* tf = model.tfconv()) {
        if (!within_limits(tf->layer().params)) {
            throw ParseError(path.string(), 0, "kernel parameters outside their limits");
        }
    }
    return model;
}

}  // namespace tfn::nn
