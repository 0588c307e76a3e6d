#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "wavehits/pipeline.hpp"
#include "wavehits/util.hpp"

// Model container: magic "WHTS", format version, config digest, provenance,
// the canonical config text, then a table of named tensors (name, rank,
// dimensions, row-major 64-bit little-endian values), terminated by a
// whole-file checksum.

namespace wavehits::pipeline {

namespace {

constexpr char kMagic[4] = {'W', 'H', 'T', 'S'};
constexpr std::uint32_t kVersion = 1;

using Buffer = std::vector<unsigned char>;

void put_u32(Buffer& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_u64(Buffer& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_f64(Buffer& buf, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    put_u64(buf, bits);
}

void put_bytes(Buffer& buf, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    buf.insert(buf.end(), p, p + n);
}

struct Reader {
    const Buffer& buf;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > buf.size())
            throw std::runtime_error("model container: truncated file");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }
    std::string str(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(buf.data() + pos), n);
        pos += n;
        return s;
    }
};

struct Entry {
    std::string name;
    std::vector<std::size_t> dims;
    std::vector<double> values;
};

void append_entry(Buffer& buf, const std::string& name,
                  const std::vector<std::size_t>& dims, const double* values) {
    put_u64(buf, name.size());
    put_bytes(buf, name.data(), name.size());
    put_u32(buf, static_cast<std::uint32_t>(dims.size()));
    std::size_t count = 1;
    for (std::size_t d : dims) {
        put_u64(buf, d);
        count *= d;
    }
    for (std::size_t i = 0; i < count; ++i) put_f64(buf, values[i]);
}

void append_vector(Buffer& buf, const std::string& name, const std::vector<double>& v) {
    append_entry(buf, name, {v.size()}, v.data());
}

}  // namespace

void save_artifact(const TrainedArtifact& artifact, const std::string& path) {
    const std::string config_text = config::canonical_text(artifact.config);

    Buffer buf;
    put_bytes(buf, kMagic, 4);
    put_u32(buf, kVersion);
    put_u64(buf, config::digest(artifact.config));
    put_u64(buf, artifact.config.seed);
    put_u64(buf, artifact.data_fingerprint);
    put_u64(buf, config_text.size());
    put_bytes(buf, config_text.data(), config_text.size());

    std::size_t n_entries = 6;  // scaler (3) + history (3)
    for (const auto& block : artifact.model.blocks) n_entries += 2 * block.net.layers.size();
    put_u64(buf, n_entries);

    append_vector(buf, "scaler.mean", artifact.scaler.mean);
    append_vector(buf, "scaler.stddev", artifact.scaler.stddev);
    std::vector<double> flags(artifact.scaler.passthrough.size());
    for (std::size_t i = 0; i < flags.size(); ++i)
        flags[i] = artifact.scaler.passthrough[i] ? 1.0 : 0.0;
    append_vector(buf, "scaler.passthrough", flags);

    append_vector(buf, "history.train_loss", artifact.history.train_loss);
    append_vector(buf, "history.val_loss", artifact.history.val_loss);
    const std::vector<double> best{static_cast<double>(artifact.history.best_epoch)};
    append_vector(buf, "history.best_epoch", best);

    for (std::size_t b = 0; b < artifact.model.blocks.size(); ++b) {
        const auto& block = artifact.model.blocks[b];
        for (std::size_t l = 0; l < block.net.layers.size(); ++l) {
            const auto& layer = block.net.layers[l];
            const std::string prefix =
                "block." + std::to_string(b) + ".layer." + std::to_string(l);
            append_entry(buf, prefix + ".weight", {layer.weights.rows, layer.weights.cols},
                         layer.weights.data.data());
            append_entry(buf, prefix + ".bias", {layer.bias.rows}, layer.bias.data.data());
        }
    }

    put_u64(buf, util::fnv1a64(buf.data(), buf.size()));

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("save_artifact: cannot open '" + path + "' for writing");
    out.write(reinterpret_cast<const char*>(buf.data()),
              static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error("save_artifact: write failure on '" + path + "'");
}

TrainedArtifact load_artifact(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_artifact: cannot open '" + path + "'");
    Buffer buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    if (buf.size() < 4 + 4 + 8)
        throw std::runtime_error("model container: truncated file");
    if (std::memcmp(buf.data(), kMagic, 4) != 0)
        throw std::runtime_error("model container: bad magic (not a model container)");

    // checksum covers everything before the trailing 8 bytes
    Reader tail{buf, buf.size() - 8};
    const std::uint64_t stored_checksum = tail.u64();
    if (util::fnv1a64(buf.data(), buf.size() - 8) != stored_checksum)
        throw std::runtime_error("model container: checksum mismatch (corrupted file)");

    Reader r{buf, 4};
    const std::uint32_t version = r.u32();
    if (version != kVersion)
        throw std::runtime_error("model container: unsupported format version " +
                                 std::to_string(version));
    const std::uint64_t stored_digest = r.u64();
    const std::uint64_t seed = r.u64();
    const std::uint64_t fingerprint = r.u64();
    const std::uint64_t config_len = r.u64();
    const std::string config_text = r.str(config_len);

    TrainedArtifact artifact;
    artifact.config = config::parse_config_text(config_text);
    artifact.data_fingerprint = fingerprint;
    if (config::digest(artifact.config) != stored_digest)
        throw std::runtime_error("model container: config digest mismatch");
    if (artifact.config.seed != seed)
        throw std::runtime_error("model container: seed field disagrees with the config");

    const std::uint64_t n_entries = r.u64();
    std::vector<Entry> entries;
    entries.reserve(n_entries);
    for (std::uint64_t e = 0; e < n_entries; ++e) {
        Entry entry;
        entry.name = r.str(r.u64());
        const std::uint32_t rank = r.u32();
        std::size_t count = 1;
        for (std::uint32_t d = 0; d < rank; ++d) {
            entry.dims.push_back(r.u64());
            count *= entry.dims.back();
        }
        entry.values.resize(count);
        for (auto& v : entry.values) v = r.f64();
        entries.push_back(std::move(entry));
    }

    auto find = [&entries](const std::string& name) -> const Entry& {
        for (const auto& e : entries)
            if (e.name == name) return e;
        throw std::runtime_error("model container: missing entry '" + name + "'");
    };

    const auto& mean = find("scaler.mean");
    const auto& stddev = find("scaler.stddev");
    const auto& flags = find("scaler.passthrough");
    artifact.scaler.mean = mean.values;
    artifact.scaler.stddev = stddev.values;
    artifact.scaler.passthrough.resize(flags.values.size());
    for (std::size_t i = 0; i < flags.values.size(); ++i)
        artifact.scaler.passthrough[i] = flags.values[i] != 0.0;

    artifact.history.train_loss = find("history.train_loss").values;
    artifact.history.val_loss = find("history.val_loss").values;
    artifact.history.best_epoch =
        static_cast<std::size_t>(find("history.best_epoch").values.at(0));

    if (artifact.config.variant != config::Variant::persistence) {
        artifact.model = nhits::make_model(model_spec_from(artifact.config),
                                           artifact.config.seed);
        for (std::size_t b = 0; b < artifact.model.blocks.size(); ++b) {
            auto& block = artifact.model.blocks[b];
            for (std::size_t l = 0; l < block.net.layers.size(); ++l) {
                auto& layer = block.net.layers[l];
                const std::string prefix =
                    "block." + std::to_string(b) + ".layer." + std::to_string(l);
                const auto& w = find(prefix + ".weight");
                if (w.dims.size() != 2 || w.dims[0] != layer.weights.rows ||
                    w.dims[1] != layer.weights.cols)
                    throw std::runtime_error("model container: shape mismatch in '" + prefix +
                                             ".weight'");
                layer.weights.data = w.values;
                const auto& bias = find(prefix + ".bias");
                if (bias.dims.size() != 1 || bias.dims[0] != layer.bias.rows)
                    throw std::runtime_error("model container: shape mismatch in '" + prefix +
                                             ".bias'");
                layer.bias.data = bias.values;
            }
        }
    }
    return artifact;
}

}  // namespace wavehits::pipeline
