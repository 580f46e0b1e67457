#include "gendernet/models.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gendernet/rng.hpp"

namespace gendernet {

namespace {

// y += A * x, A row-major m x n.
void matvec_acc(const Tensor2& A, const double* x, double* y) {
    for (int i = 0; i < A.rows; ++i) {
        const double* a = A.row(i);
        double s = 0.0;
        for (int j = 0; j < A.cols; ++j) s += a[j] * x[j];
        y[i] += s;
    }
}

// y += A^T * s.
void matvec_transpose_acc(const Tensor2& A, const double* s, double* y) {
    for (int i = 0; i < A.rows; ++i) {
        const double si = s[i];
        if (si == 0.0) continue;
        const double* a = A.row(i);
        for (int j = 0; j < A.cols; ++j) y[j] += si * a[j];
    }
}

// A += s (x) x, outer product.
void outer_acc(Tensor2& A, const double* s, const double* x) {
    for (int i = 0; i < A.rows; ++i) {
        const double si = s[i];
        if (si == 0.0) continue;
        double* a = A.row(i);
        for (int j = 0; j < A.cols; ++j) a[j] += si * x[j];
    }
}

void ensure_size(std::vector<double>& v, std::size_t n) {
    if (v.size() != n) v.assign(n, 0.0);
}

constexpr const char* kLstmGateNames[] = {"input", "forget", "output", "candidate"};
constexpr const char* kGruGateNames[] = {"update", "reset", "candidate"};

}  // namespace

std::string_view model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::dense: return "dense";
        case ModelKind::gru: return "gru";
        case ModelKind::lstm: return "lstm";
    }
    return "unknown";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
    if (name == "dense") return ModelKind::dense;
    if (name == "gru") return ModelKind::gru;
    if (name == "lstm") return ModelKind::lstm;
    return std::nullopt;
}

void embedding_forward(const EncodedWord& input, const Tensor2& table, std::vector<double>& out) {
    const int d = table.cols;
    ensure_size(out, input.indices.size() * static_cast<std::size_t>(d));
    for (std::size_t t = 0; t < input.indices.size(); ++t) {
        const int idx = input.indices[t];
        if (idx < 0 || idx >= table.rows) {
            throw std::out_of_range("embedding_forward: index " + std::to_string(idx) +
                                    " out of range for table of " + std::to_string(table.rows) +
                                    " rows");
        }
        const double* row = table.row(idx);
        std::copy(row, row + d, out.data() + t * static_cast<std::size_t>(d));
    }
}

Model::Model(Vocabulary vocab, int max_len, int embedding_dim)
    : vocab_(std::move(vocab)), max_len_(max_len), embedding_dim_(embedding_dim) {
    if (max_len_ < 1) throw std::invalid_argument("model: max_len must be >= 1");
    if (embedding_dim_ < 1) throw std::invalid_argument("model: embedding_dim must be >= 1");
}

double Model::forward(const EncodedWord& input) const {
    ForwardTrace trace;
    return forward(input, trace);
}

void Model::backward(const ForwardTrace& trace, int label) {
    std::vector<Tensor2*> grads;
    for (Param* p : parameters()) grads.push_back(&p->grad);
    backward_to(trace, label, grads);
}

std::vector<Param*> Model::parameters() {
    std::vector<Param*> out;
    collect_params(out);
    return out;
}

std::vector<const Param*> Model::parameters() const {
    std::vector<Param*> mut;
    const_cast<Model*>(this)->collect_params(mut);
    return {mut.begin(), mut.end()};
}

void Model::zero_grads() {
    for (Param* p : parameters()) p->grad.fill(0.0);
}

std::int64_t Model::parameter_count() const {
    std::int64_t n = 0;
    for (const Param* p : parameters()) n += static_cast<std::int64_t>(p->value.size());
    return n;
}

double Model::predict(std::string_view word) const {
    return forward(encode_word(word, vocab_, max_len_));
}

// ---------------------------------------------------------------------------
// Dense: flatten(embed) -> tanh layer -> sigmoid readout.
// ---------------------------------------------------------------------------

DenseModel::DenseModel(Vocabulary vocab, int max_len, int embedding_dim, int hidden_size,
                       std::uint64_t seed)
    : Model(std::move(vocab), max_len, embedding_dim) {
    if (hidden_size < 1) throw std::invalid_argument("dense model: hidden_size must be >= 1");
    const int table_rows = vocab_.size() + 2;
    const int flat = max_len_ * embedding_dim_;
    embedding_ = Param("embedding", table_rows, embedding_dim_);
    embedding_.value = glorot_init(table_rows, embedding_dim_, mix_seeds(seed, 0));
    hidden_w_ = Param("hidden.w", hidden_size, flat);
    hidden_w_.value = glorot_init(hidden_size, flat, mix_seeds(seed, 1));
    hidden_b_ = Param("hidden.b", 1, hidden_size);
    out_w_ = Param("out.w", 1, hidden_size);
    out_w_.value = glorot_init(1, hidden_size, mix_seeds(seed, 3));
    out_b_ = Param("out.b", 1, 1);
}

void DenseModel::collect_params(std::vector<Param*>& out) {
    out.push_back(&embedding_);
    out.push_back(&hidden_w_);
    out.push_back(&hidden_b_);
    out.push_back(&out_w_);
    out.push_back(&out_b_);
}

double DenseModel::forward(const EncodedWord& input, ForwardTrace& trace) const {
    if (static_cast<int>(input.indices.size()) != max_len_) {
        throw std::invalid_argument("dense forward: encoded length does not match max_len");
    }
    const int h = hidden_w_.value.rows;
    trace.indices = input.indices;
    trace.true_length = input.true_length;
    embedding_forward(input, embedding_.value, trace.embedded);
    ensure_size(trace.hidden_pre, static_cast<std::size_t>(h));
    ensure_size(trace.hidden, static_cast<std::size_t>(h));

    std::copy(hidden_b_.value.v.begin(), hidden_b_.value.v.end(), trace.hidden_pre.begin());
    matvec_acc(hidden_w_.value, trace.embedded.data(), trace.hidden_pre.data());
    for (int j = 0; j < h; ++j) trace.hidden[j] = tanh_elem(trace.hidden_pre[j]);

    double z = out_b_.value.v[0];
    const double* w = out_w_.value.v.data();
    for (int j = 0; j < h; ++j) z += w[j] * trace.hidden[j];
    trace.readout_pre = z;
    trace.probability = sigmoid(z);
    return trace.probability;
}

void DenseModel::backward_to(const ForwardTrace& trace, int label,
                             const std::vector<Tensor2*>& grads) const {
    const int h = hidden_w_.value.rows;
    const int flat = max_len_ * embedding_dim_;
    if (grads.size() != 5 || static_cast<int>(trace.hidden.size()) != h ||
        static_cast<int>(trace.embedded.size()) != flat) {
        throw std::invalid_argument("dense backward: trace does not match this model");
    }
    Tensor2& g_emb = *grads[0];
    Tensor2& g_hw = *grads[1];
    Tensor2& g_hb = *grads[2];
    Tensor2& g_ow = *grads[3];
    Tensor2& g_ob = *grads[4];

    const double dz = trace.probability - static_cast<double>(label);
    g_ob.v[0] += dz;

    std::vector<double> d_act(static_cast<std::size_t>(h));
    const double* w = out_w_.value.v.data();
    for (int j = 0; j < h; ++j) {
        g_ow.v[j] += dz * trace.hidden[j];
        const double dh = dz * w[j];
        d_act[j] = dh * (1.0 - trace.hidden[j] * trace.hidden[j]);
        g_hb.v[j] += d_act[j];
    }
    outer_acc(g_hw, d_act.data(), trace.embedded.data());

    std::vector<double> d_flat(static_cast<std::size_t>(flat), 0.0);
    matvec_transpose_acc(hidden_w_.value, d_act.data(), d_flat.data());
    for (int t = 0; t < max_len_; ++t) {
        double* row = g_emb.row(trace.indices[static_cast<std::size_t>(t)]);
        const double* src = d_flat.data() + static_cast<std::size_t>(t) * embedding_dim_;
        for (int d = 0; d < embedding_dim_; ++d) row[d] += src[d];
    }
}

// ---------------------------------------------------------------------------
// GRU / LSTM: shared embedding, per-gate parameter triples, readout over the
// concatenation of every hidden state.
// ---------------------------------------------------------------------------

RecurrentModel::RecurrentModel(ModelKind kind, Vocabulary vocab, int max_len, int embedding_dim,
                               int hidden_size, std::uint64_t seed)
    : Model(std::move(vocab), max_len, embedding_dim), kind_(kind), hidden_size_(hidden_size) {
    if (kind_ != ModelKind::gru && kind_ != ModelKind::lstm) {
        throw std::invalid_argument("recurrent model: kind must be gru or lstm");
    }
    if (hidden_size_ < 1) throw std::invalid_argument("recurrent model: hidden_size must be >= 1");

    const int table_rows = vocab_.size() + 2;
    embedding_ = Param("embedding", table_rows, embedding_dim_);
    embedding_.value = glorot_init(table_rows, embedding_dim_, mix_seeds(seed, 0));

    const int n = n_gates();
    gates_.resize(static_cast<std::size_t>(n));
    for (int g = 0; g < n; ++g) {
        const std::string base =
            kind_ == ModelKind::lstm ? kLstmGateNames[g] : kGruGateNames[g];
        GateParam& gate = gates_[static_cast<std::size_t>(g)];
        gate.w_in = Param(base + ".w_in", hidden_size_, embedding_dim_);
        gate.w_in.value = glorot_init(hidden_size_, embedding_dim_, mix_seeds(seed, 1 + 3 * g));
        gate.w_rec = Param(base + ".w_rec", hidden_size_, hidden_size_);
        gate.w_rec.value = glorot_init(hidden_size_, hidden_size_, mix_seeds(seed, 2 + 3 * g));
        gate.bias = Param(base + ".bias", 1, hidden_size_);
    }
    // Forget-gate bias starts at 1 so fresh LSTMs keep their cell state.
    if (kind_ == ModelKind::lstm) gates_[1].bias.value.fill(1.0);

    readout_w_ = Param("readout.w", 1, max_len_ * hidden_size_);
    readout_w_.value = glorot_init(1, max_len_ * hidden_size_, mix_seeds(seed, 1 + 3 * n));
    readout_b_ = Param("readout.b", 1, 1);
}

void RecurrentModel::collect_params(std::vector<Param*>& out) {
    out.push_back(&embedding_);
    for (auto& g : gates_) {
        out.push_back(&g.w_in);
        out.push_back(&g.w_rec);
        out.push_back(&g.bias);
    }
    out.push_back(&readout_w_);
    out.push_back(&readout_b_);
}

void RecurrentModel::cell_step(const double* x, const double* h_prev, const double* c_prev,
                               double* h_out, double* c_out, double* gate_pre, double* gate_act,
                               double* c_tanh, double* scratch) const {
    const int h = hidden_size_;
    if (kind_ == ModelKind::lstm) {
        for (int g = 0; g < 4; ++g) {
            double* pre = gate_pre + g * h;
            std::copy(gates_[g].bias.value.v.begin(), gates_[g].bias.value.v.end(), pre);
            matvec_acc(gates_[g].w_in.value, x, pre);
            matvec_acc(gates_[g].w_rec.value, h_prev, pre);
        }
        double* i_g = gate_act;
        double* f_g = gate_act + h;
        double* o_g = gate_act + 2 * h;
        double* c_g = gate_act + 3 * h;
        for (int j = 0; j < h; ++j) {
            i_g[j] = sigmoid(gate_pre[j]);
            f_g[j] = sigmoid(gate_pre[h + j]);
            o_g[j] = sigmoid(gate_pre[2 * h + j]);
            c_g[j] = tanh_elem(gate_pre[3 * h + j]);
            c_out[j] = f_g[j] * c_prev[j] + i_g[j] * c_g[j];
            c_tanh[j] = tanh_elem(c_out[j]);
            h_out[j] = o_g[j] * c_tanh[j];
        }
    } else {
        for (int g = 0; g < 2; ++g) {
            double* pre = gate_pre + g * h;
            std::copy(gates_[g].bias.value.v.begin(), gates_[g].bias.value.v.end(), pre);
            matvec_acc(gates_[g].w_in.value, x, pre);
            matvec_acc(gates_[g].w_rec.value, h_prev, pre);
        }
        double* z_g = gate_act;
        double* r_g = gate_act + h;
        double* cand = gate_act + 2 * h;
        for (int j = 0; j < h; ++j) {
            z_g[j] = sigmoid(gate_pre[j]);
            r_g[j] = sigmoid(gate_pre[h + j]);
            scratch[j] = r_g[j] * h_prev[j];
        }
        double* pre_c = gate_pre + 2 * h;
        std::copy(gates_[2].bias.value.v.begin(), gates_[2].bias.value.v.end(), pre_c);
        matvec_acc(gates_[2].w_in.value, x, pre_c);
        matvec_acc(gates_[2].w_rec.value, scratch, pre_c);
        for (int j = 0; j < h; ++j) {
            cand[j] = tanh_elem(pre_c[j]);
            h_out[j] = (1.0 - z_g[j]) * h_prev[j] + z_g[j] * cand[j];
        }
    }
}

double RecurrentModel::forward(const EncodedWord& input, ForwardTrace& trace) const {
    if (static_cast<int>(input.indices.size()) != max_len_) {
        throw std::invalid_argument("rnn forward: encoded length does not match max_len");
    }
    const int T = max_len_;
    const int H = hidden_size_;
    const int G = n_gates();
    const bool is_lstm = kind_ == ModelKind::lstm;

    trace.indices = input.indices;
    trace.true_length = input.true_length;
    embedding_forward(input, embedding_.value, trace.embedded);
    ensure_size(trace.gate_pre, static_cast<std::size_t>(T) * G * H);
    ensure_size(trace.gate_act, static_cast<std::size_t>(T) * G * H);
    ensure_size(trace.hidden, static_cast<std::size_t>(T) * H);
    ensure_size(trace.cell_state, is_lstm ? static_cast<std::size_t>(T) * H : 0);
    ensure_size(trace.cell_tanh, is_lstm ? static_cast<std::size_t>(T) * H : 0);
    // scratch: [0,H) gate work area, [H,2H) the all-zero initial state
    ensure_size(trace.scratch, 2 * static_cast<std::size_t>(H));
    std::fill(trace.scratch.begin() + H, trace.scratch.end(), 0.0);

    const double* zeros = trace.scratch.data() + H;
    const double* h_prev = zeros;
    const double* c_prev = zeros;
    for (int t = 0; t < T; ++t) {
        const double* x_t = trace.embedded.data() + static_cast<std::size_t>(t) * embedding_dim_;
        double* h_t = trace.hidden.data() + static_cast<std::size_t>(t) * H;
        double* c_t = is_lstm ? trace.cell_state.data() + static_cast<std::size_t>(t) * H : nullptr;
        double* tc_t = is_lstm ? trace.cell_tanh.data() + static_cast<std::size_t>(t) * H : nullptr;
        cell_step(x_t, h_prev, c_prev,
                  h_t, c_t,
                  trace.gate_pre.data() + static_cast<std::size_t>(t) * G * H,
                  trace.gate_act.data() + static_cast<std::size_t>(t) * G * H,
                  tc_t, trace.scratch.data());
        h_prev = h_t;
        c_prev = c_t;
    }

    double z = readout_b_.value.v[0];
    const double* w = readout_w_.value.v.data();
    for (std::size_t k = 0; k < trace.hidden.size(); ++k) z += w[k] * trace.hidden[k];
    trace.readout_pre = z;
    trace.probability = sigmoid(z);
    return trace.probability;
}

void RecurrentModel::backward_to(const ForwardTrace& trace, int label,
                                 const std::vector<Tensor2*>& grads) const {
    const int T = max_len_;
    const int H = hidden_size_;
    const int D = embedding_dim_;
    const int G = n_gates();
    if (grads.size() != static_cast<std::size_t>(3 * G + 3) ||
        trace.hidden.size() != static_cast<std::size_t>(T) * H ||
        trace.gate_act.size() != static_cast<std::size_t>(T) * G * H) {
        throw std::invalid_argument("rnn backward: trace does not match this model");
    }

    // grads layout mirrors collect_params: [0] embedding, then per gate g
    // {w_in, w_rec, bias} at [1+3g .. 3+3g], then readout.w, readout.b.
    Tensor2& g_emb = *grads[0];
    Tensor2& g_rw = *grads[static_cast<std::size_t>(1 + 3 * G)];
    Tensor2& g_rb = *grads[static_cast<std::size_t>(2 + 3 * G)];

    const double dz = trace.probability - static_cast<double>(label);
    g_rb.v[0] += dz;
    for (std::size_t k = 0; k < trace.hidden.size(); ++k) g_rw.v[k] += dz * trace.hidden[k];

    const double* w_r = readout_w_.value.v.data();
    std::vector<double> dh(static_cast<std::size_t>(H));
    std::vector<double> dc(static_cast<std::size_t>(H));
    std::vector<double> carry_h(static_cast<std::size_t>(H), 0.0);
    std::vector<double> carry_c(static_cast<std::size_t>(H), 0.0);
    std::vector<double> dpre(static_cast<std::size_t>(G) * H);
    std::vector<double> dx(static_cast<std::size_t>(D));
    std::vector<double> work(static_cast<std::size_t>(H));

    for (int t = T - 1; t >= 0; --t) {
        const double* x_t = trace.embedded.data() + static_cast<std::size_t>(t) * D;
        const double* h_prev =
            t > 0 ? trace.hidden.data() + static_cast<std::size_t>(t - 1) * H : nullptr;
        const double* act = trace.gate_act.data() + static_cast<std::size_t>(t) * G * H;

        for (int j = 0; j < H; ++j) dh[j] = dz * w_r[static_cast<std::size_t>(t) * H + j] + carry_h[j];

        if (kind_ == ModelKind::lstm) {
            const double* i_g = act;
            const double* f_g = act + H;
            const double* o_g = act + 2 * H;
            const double* c_g = act + 3 * H;
            const double* tc = trace.cell_tanh.data() + static_cast<std::size_t>(t) * H;
            const double* c_prev =
                t > 0 ? trace.cell_state.data() + static_cast<std::size_t>(t - 1) * H : nullptr;
            for (int j = 0; j < H; ++j) {
                dc[j] = carry_c[j] + dh[j] * o_g[j] * (1.0 - tc[j] * tc[j]);
                const double d_o = dh[j] * tc[j];
                dpre[static_cast<std::size_t>(2) * H + j] = d_o * o_g[j] * (1.0 - o_g[j]);
                const double cp = c_prev ? c_prev[j] : 0.0;
                const double d_f = dc[j] * cp;
                dpre[static_cast<std::size_t>(H) + j] = d_f * f_g[j] * (1.0 - f_g[j]);
                const double d_i = dc[j] * c_g[j];
                dpre[static_cast<std::size_t>(j)] = d_i * i_g[j] * (1.0 - i_g[j]);
                const double d_cand = dc[j] * i_g[j];
                dpre[static_cast<std::size_t>(3) * H + j] = d_cand * (1.0 - c_g[j] * c_g[j]);
                carry_c[j] = dc[j] * f_g[j];
            }
        } else {
            const double* z_g = act;
            const double* r_g = act + H;
            const double* c_g = act + 2 * H;
            for (int j = 0; j < H; ++j) {
                const double hp = h_prev ? h_prev[j] : 0.0;
                const double d_z = dh[j] * (c_g[j] - hp);
                dpre[static_cast<std::size_t>(j)] = d_z * z_g[j] * (1.0 - z_g[j]);
                const double d_cand = dh[j] * z_g[j];
                dpre[static_cast<std::size_t>(2) * H + j] = d_cand * (1.0 - c_g[j] * c_g[j]);
                carry_h[j] = dh[j] * (1.0 - z_g[j]);
            }
            // candidate recurrent input is r (*) h_prev
            std::fill(work.begin(), work.end(), 0.0);
            matvec_transpose_acc(gates_[2].w_rec.value, dpre.data() + 2 * H, work.data());
            for (int j = 0; j < H; ++j) {
                const double hp = h_prev ? h_prev[j] : 0.0;
                const double d_r = work[j] * hp;
                dpre[static_cast<std::size_t>(H) + j] = d_r * r_g[j] * (1.0 - r_g[j]);
                carry_h[j] += work[j] * r_g[j];
            }
        }

        if (kind_ == ModelKind::lstm) std::fill(carry_h.begin(), carry_h.end(), 0.0);
        std::fill(dx.begin(), dx.end(), 0.0);
        for (int g = 0; g < G; ++g) {
            const double* dp = dpre.data() + static_cast<std::size_t>(g) * H;
            Tensor2& gw_in = *grads[static_cast<std::size_t>(1 + 3 * g)];
            Tensor2& gw_rec = *grads[static_cast<std::size_t>(2 + 3 * g)];
            Tensor2& gb = *grads[static_cast<std::size_t>(3 + 3 * g)];
            for (int j = 0; j < H; ++j) gb.v[j] += dp[j];
            outer_acc(gw_in, dp, x_t);
            if (h_prev) {
                if (kind_ == ModelKind::gru && g == 2) {
                    const double* r_g = act + H;
                    for (int j = 0; j < H; ++j) work[j] = r_g[j] * h_prev[j];
                    outer_acc(gw_rec, dp, work.data());
                } else {
                    outer_acc(gw_rec, dp, h_prev);
                }
            }
            matvec_transpose_acc(gates_[static_cast<std::size_t>(g)].w_in.value, dp, dx.data());
            // candidate's pull on h_prev was routed through the reset gate above
            if (!(kind_ == ModelKind::gru && g == 2)) {
                matvec_transpose_acc(gates_[static_cast<std::size_t>(g)].w_rec.value, dp,
                                     carry_h.data());
            }
        }

        double* erow = g_emb.row(trace.indices[static_cast<std::size_t>(t)]);
        for (int d = 0; d < D; ++d) erow[d] += dx[d];
    }
}

LstmStepResult lstm_step(std::span<const double> x, std::span<const double> h_prev,
                         std::span<const double> c_prev, const RecurrentModel& m) {
    if (m.kind() != ModelKind::lstm) throw std::invalid_argument("lstm_step: not an LSTM model");
    const int H = m.hidden_size();
    if (static_cast<int>(x.size()) != m.embedding_dim() || static_cast<int>(h_prev.size()) != H ||
        static_cast<int>(c_prev.size()) != H) {
        throw std::invalid_argument("lstm_step: shape mismatch");
    }
    LstmStepResult out;
    out.h.resize(static_cast<std::size_t>(H));
    out.c.resize(static_cast<std::size_t>(H));
    std::vector<double> pre(static_cast<std::size_t>(4) * H), act(static_cast<std::size_t>(4) * H),
        c_tanh(static_cast<std::size_t>(H)), scratch(static_cast<std::size_t>(H));
    m.cell_step(x.data(), h_prev.data(), c_prev.data(), out.h.data(), out.c.data(), pre.data(),
                act.data(), c_tanh.data(), scratch.data());
    return out;
}

std::vector<double> gru_step(std::span<const double> x, std::span<const double> h_prev,
                             const RecurrentModel& m) {
    if (m.kind() != ModelKind::gru) throw std::invalid_argument("gru_step: not a GRU model");
    const int H = m.hidden_size();
    if (static_cast<int>(x.size()) != m.embedding_dim() || static_cast<int>(h_prev.size()) != H) {
        throw std::invalid_argument("gru_step: shape mismatch");
    }
    std::vector<double> h(static_cast<std::size_t>(H));
    std::vector<double> pre(static_cast<std::size_t>(3) * H), act(static_cast<std::size_t>(3) * H),
        scratch(static_cast<std::size_t>(H));
    m.cell_step(x.data(), h_prev.data(), nullptr, h.data(), nullptr, pre.data(), act.data(),
                nullptr, scratch.data());
    return h;
}

std::unique_ptr<Model> make_model(ModelKind kind, Vocabulary vocab, int max_len,
                                  int embedding_dim, int hidden_size, std::uint64_t seed) {
    if (kind == ModelKind::dense) {
        return std::make_unique<DenseModel>(std::move(vocab), max_len, embedding_dim, hidden_size,
                                            seed);
    }
    return std::make_unique<RecurrentModel>(kind, std::move(vocab), max_len, embedding_dim,
                                            hidden_size, seed);
}

std::int64_t count_parameters(const Model& m) { return m.parameter_count(); }

}  // namespace gendernet
