// Model checkpoint format "LSAE", version 1:
//   magic "LSAE" | version u16 | header length u32 | header JSON |
//   per layer (encoder, decoder, head): weights row-major f64, biases f64 |
//   scaler mins f64[d], maxs f64[d] (when bundled) | CRC-32 of all prior bytes.
// All integers and floats little-endian. Doubles are stored bit-exactly, so
// save -> load -> encode reproduces embeddings bitwise.

#include <json.hpp>

#include "lse/autoencoder.hpp"
#include "lse/binary_io.hpp"
#include "lse/crc32.hpp"
#include "lse/error.hpp"

namespace lse {

namespace {

constexpr char kMagic[4] = {'L', 'S', 'A', 'E'};
constexpr std::uint16_t kVersion = 1;

void put_layer(ByteWriter& w, const LayerParams& layer) {
    for (double v : layer.weights.values()) w.put_f64(v);
    for (double v : layer.biases) w.put_f64(v);
}

LayerParams get_layer(ByteReader& r, std::size_t in_dim, std::size_t out_dim, Activation act) {
    LayerParams layer;
    layer.weights = Matrix(in_dim, out_dim);
    for (double& v : layer.weights.values()) v = r.get_f64();
    layer.biases.resize(out_dim);
    for (double& v : layer.biases) v = r.get_f64();
    layer.activation = act;
    return layer;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    const auto& cfg = ckpt.model.config;
    nlohmann::json header{
        {"input_dim", cfg.input_dim},
        {"latent_dim", cfg.latent_dim},
        {"encoder_hidden", cfg.encoder_hidden},
        {"feature_names", ckpt.feature_names},
        {"has_scaler", ckpt.scaler.has_value()},
    };
    if (cfg.multitask) {
        header["multitask"] = {{"task", task_name(cfg.multitask->task)},
                               {"head_classes", cfg.multitask->head_classes},
                               {"lambda", cfg.multitask->lambda}};
    }

    ByteWriter w;
    w.put_bytes(std::span(reinterpret_cast<const unsigned char*>(kMagic), 4));
    w.put_u16(kVersion);
    const std::string header_str = header.dump();
    w.put_string(header_str);
    for (const auto& layer : ckpt.model.encoder) put_layer(w, layer);
    for (const auto& layer : ckpt.model.decoder) put_layer(w, layer);
    if (ckpt.model.head) put_layer(w, *ckpt.model.head);
    if (ckpt.scaler) {
        for (double v : ckpt.scaler->mins) w.put_f64(v);
        for (double v : ckpt.scaler->maxs) w.put_f64(v);
    }
    w.put_u32(crc32_of(w.bytes()));
    write_file_bytes(path, w.bytes());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    const std::vector<unsigned char> bytes = read_file_bytes(path);
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw FileFormatError(FileErrorCode::bad_magic,
                              "'" + path.string() + "' is not a model checkpoint");
    if (bytes.size() < 10)
        throw FileFormatError(FileErrorCode::truncated, "'" + path.string() + "' is truncated");

    const std::uint32_t stored_crc =
        static_cast<std::uint32_t>(bytes[bytes.size() - 4]) |
        (static_cast<std::uint32_t>(bytes[bytes.size() - 3]) << 8) |
        (static_cast<std::uint32_t>(bytes[bytes.size() - 2]) << 16) |
        (static_cast<std::uint32_t>(bytes[bytes.size() - 1]) << 24);
    const std::uint32_t actual_crc = crc32_of(std::span(bytes.data(), bytes.size() - 4));
    if (stored_crc != actual_crc)
        throw FileFormatError(FileErrorCode::crc_mismatch,
                              "'" + path.string() + "' failed its CRC check");

    ByteReader r(std::span(bytes.data(), bytes.size() - 4));
    r.take(4);  // magic
    const std::uint16_t version = r.get_u16();
    if (version != kVersion)
        throw FileFormatError(FileErrorCode::unsupported_version,
                              "checkpoint version " + std::to_string(version) + " unsupported");

    nlohmann::json header;
    try {
        header = nlohmann::json::parse(r.get_string());
    } catch (const nlohmann::json::exception& e) {
        throw FileFormatError(FileErrorCode::invalid, std::string("bad checkpoint header: ") + e.what());
    }

    Checkpoint ckpt;
    AutoencoderConfig cfg;
    try {
        cfg.input_dim = header.at("input_dim").get<std::size_t>();
        cfg.latent_dim = header.at("latent_dim").get<std::size_t>();
        cfg.encoder_hidden = header.at("encoder_hidden").get<std::vector<std::size_t>>();
        ckpt.feature_names = header.at("feature_names").get<std::vector<std::string>>();
        if (header.contains("multitask")) {
            MultitaskConfig mt;
            mt.task = task_from_string(header["multitask"].at("task").get<std::string>());
            mt.head_classes = header["multitask"].at("head_classes").get<std::size_t>();
            mt.lambda = header["multitask"].at("lambda").get<double>();
            cfg.multitask = mt;
        }
    } catch (const nlohmann::json::exception& e) {
        throw FileFormatError(FileErrorCode::invalid, std::string("bad checkpoint header: ") + e.what());
    }
    ckpt.model.config = cfg;

    std::size_t in = cfg.input_dim;
    for (std::size_t h : cfg.encoder_hidden) {
        ckpt.model.encoder.push_back(get_layer(r, in, h, Activation::relu));
        in = h;
    }
    ckpt.model.encoder.push_back(get_layer(r, in, cfg.latent_dim, Activation::identity));
    in = cfg.latent_dim;
    for (auto it = cfg.encoder_hidden.rbegin(); it != cfg.encoder_hidden.rend(); ++it) {
        ckpt.model.decoder.push_back(get_layer(r, in, *it, Activation::relu));
        in = *it;
    }
    ckpt.model.decoder.push_back(get_layer(r, in, cfg.input_dim, Activation::identity));
    if (cfg.multitask) {
        const bool classify = cfg.multitask->task == Task::classification;
        ckpt.model.head = get_layer(r, cfg.latent_dim, classify ? cfg.multitask->head_classes : 1,
                                    classify ? Activation::softmax : Activation::identity);
    }
    if (header.at("has_scaler").get<bool>()) {
        ScalerParams scaler;
        scaler.mins.resize(cfg.input_dim);
        for (double& v : scaler.mins) v = r.get_f64();
        scaler.maxs.resize(cfg.input_dim);
        for (double& v : scaler.maxs) v = r.get_f64();
        ckpt.scaler = std::move(scaler);
    }
    if (r.remaining() != 0)
        throw FileFormatError(FileErrorCode::invalid,
                              "checkpoint has " + std::to_string(r.remaining()) + " trailing bytes");
    return ckpt;
}

}  // namespace lse
