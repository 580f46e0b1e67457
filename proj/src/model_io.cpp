#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "gendernet/models.hpp"

namespace gendernet {

namespace {

constexpr char kMagic[4] = {'G', 'N', 'E', 'T'};
constexpr std::uint32_t kFormatVersion = 1;

std::uint64_t fnv1a64(const unsigned char* data, std::size_t n) {
    std::uint64_t h = 14695981039346656037ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 1099511628211ull;
    }
    return h;
}

void put_u32(std::vector<unsigned char>& b, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::vector<unsigned char>& b, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::vector<unsigned char>& b, double v) {
    put_u64(b, std::bit_cast<std::uint64_t>(v));
}

void put_string(std::vector<unsigned char>& b, const std::string& s) {
    put_u32(b, static_cast<std::uint32_t>(s.size()));
    b.insert(b.end(), s.begin(), s.end());
}

class Reader {
public:
    Reader(const unsigned char* data, std::size_t n) : data_(data), n_(n) {}

    std::uint8_t u8() {
        require(1);
        return data_[pos_++];
    }
    std::uint32_t u32() {
        require(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    std::uint64_t u64() {
        require(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str(std::size_t len) {
        require(len);
        std::string s(reinterpret_cast<const char*>(data_ + pos_), len);
        pos_ += len;
        return s;
    }
    std::size_t remaining() const { return n_ - pos_; }

private:
    void require(std::size_t n) {
        if (n_ - pos_ < n) throw std::runtime_error("truncated model file");
    }
    const unsigned char* data_;
    std::size_t n_;
    std::size_t pos_ = 0;
};

std::uint8_t kind_tag(ModelKind kind) {
    switch (kind) {
        case ModelKind::dense: return 0;
        case ModelKind::gru: return 1;
        case ModelKind::lstm: return 2;
    }
    throw std::logic_error("unknown model kind");
}

ModelKind kind_from_tag(std::uint8_t tag) {
    switch (tag) {
        case 0: return ModelKind::dense;
        case 1: return ModelKind::gru;
        case 2: return ModelKind::lstm;
        default: throw std::runtime_error("model file declares unknown model kind");
    }
}

constexpr std::uint32_t kDimLimit = 1u << 24;

std::uint32_t checked_dim(std::uint32_t v, const char* what) {
    if (v == 0 || v > kDimLimit) {
        throw std::runtime_error(std::string("model file has implausible ") + what);
    }
    return v;
}

}  // namespace

void save_model(const Model& m, const std::filesystem::path& path) {
    std::vector<unsigned char> buf;
    buf.insert(buf.end(), kMagic, kMagic + 4);
    put_u32(buf, kFormatVersion);
    buf.push_back(kind_tag(m.kind()));
    put_u32(buf, static_cast<std::uint32_t>(m.max_len()));
    put_u32(buf, static_cast<std::uint32_t>(m.embedding_dim()));
    put_u32(buf, static_cast<std::uint32_t>(m.hidden_size()));

    const auto& cps = m.vocab().code_points();
    put_u32(buf, static_cast<std::uint32_t>(cps.size()));
    for (char32_t c : cps) put_u32(buf, static_cast<std::uint32_t>(c));

    const auto params = m.parameters();
    put_u32(buf, static_cast<std::uint32_t>(params.size()));
    for (const Param* p : params) {
        put_string(buf, p->name);
        put_u32(buf, static_cast<std::uint32_t>(p->value.rows));
        put_u32(buf, static_cast<std::uint32_t>(p->value.cols));
        for (double x : p->value.v) put_f64(buf, x);
    }

    put_u64(buf, fnv1a64(buf.data(), buf.size()));

    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file: " + path.string());
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::unique_ptr<Model> load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open model file: " + path.string());
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());

    if (buf.size() < 8 + 4) throw std::runtime_error("truncated model file");
    const std::size_t body = buf.size() - 8;
    std::uint64_t stored = 0;
    for (int i = 0; i < 8; ++i) stored |= static_cast<std::uint64_t>(buf[body + i]) << (8 * i);
    if (fnv1a64(buf.data(), body) != stored) {
        throw std::runtime_error("model file checksum mismatch (corrupted file)");
    }

    Reader r(buf.data(), body);
    if (std::memcmp(r.str(4).data(), kMagic, 4) != 0) {
        throw std::runtime_error("not a GNET model file");
    }
    const std::uint32_t version = r.u32();
    if (version != kFormatVersion) {
        throw std::runtime_error("unsupported model file version " + std::to_string(version));
    }
    const ModelKind kind = kind_from_tag(r.u8());
    const int max_len = static_cast<int>(checked_dim(r.u32(), "max_len"));
    const int d_emb = static_cast<int>(checked_dim(r.u32(), "embedding dim"));
    const int hidden = static_cast<int>(checked_dim(r.u32(), "hidden size"));

    const std::uint32_t vocab_n = r.u32();
    if (vocab_n > kDimLimit) throw std::runtime_error("model file has implausible vocabulary");
    std::vector<char32_t> cps;
    cps.reserve(vocab_n);
    for (std::uint32_t i = 0; i < vocab_n; ++i) cps.push_back(static_cast<char32_t>(r.u32()));
    Vocabulary vocab = [&] {
        try {
            return Vocabulary::from_code_points(std::move(cps));
        } catch (const std::invalid_argument&) {
            throw std::runtime_error("model file vocabulary is malformed");
        }
    }();

    auto model = make_model(kind, std::move(vocab), max_len, d_emb, hidden, 0);
    const auto params = model->parameters();

    const std::uint32_t tensor_n = r.u32();
    if (tensor_n != params.size()) {
        throw std::runtime_error("model file tensor count does not match declared kind");
    }
    for (Param* p : params) {
        const std::uint32_t name_len = r.u32();
        if (name_len > 4096) throw std::runtime_error("model file tensor name too long");
        const std::string name = r.str(name_len);
        const std::uint32_t rows = r.u32();
        const std::uint32_t cols = r.u32();
        if (name != p->name || rows != static_cast<std::uint32_t>(p->value.rows) ||
            cols != static_cast<std::uint32_t>(p->value.cols)) {
            throw std::runtime_error("model file tensor '" + name +
                                     "' does not match declared kind (expected '" + p->name +
                                     "')");
        }
        for (double& x : p->value.v) x = r.f64();
    }
    if (r.remaining() != 0) throw std::runtime_error("model file has trailing bytes");
    return model;
}

std::unique_ptr<RecurrentModel> load_recurrent_model(const std::filesystem::path& path) {
    auto model = load_model(path);
    if (dynamic_cast<RecurrentModel*>(model.get()) == nullptr) {
        throw std::runtime_error("model kind '" + std::string(model_kind_name(model->kind())) +
                                 "' is not recurrent; this operation needs a GRU or LSTM model");
    }
    return std::unique_ptr<RecurrentModel>(static_cast<RecurrentModel*>(model.release()));
}

}  // namespace gendernet
