#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gendernet/encoding.hpp"
#include "gendernet/nn_core.hpp"

namespace gendernet {

enum class ModelKind { dense, gru, lstm };

std::string_view model_kind_name(ModelKind kind);
std::optional<ModelKind> parse_model_kind(std::string_view name);

// Everything the backward pass needs from one forward pass. Recurrent models
// fill the gate/cell/hidden sequences; the dense model uses hidden_pre and
// hidden for its single tanh layer. Buffers are reused across calls.
struct ForwardTrace {
    std::vector<int> indices;        // input indices, length max_len
    int true_length = 0;
    std::vector<double> embedded;    // max_len * d_emb
    std::vector<double> gate_pre;    // max_len * n_gates * hidden
    std::vector<double> gate_act;    // max_len * n_gates * hidden
    std::vector<double> cell_state;  // max_len * hidden (LSTM)
    std::vector<double> cell_tanh;   // max_len * hidden (LSTM)
    std::vector<double> hidden;      // max_len * hidden, or dense hidden layer
    std::vector<double> hidden_pre;  // dense hidden pre-activation
    double readout_pre = 0.0;
    double probability = 0.5;

    std::vector<double> scratch;     // per-step work area, not part of the trace
};

// Copies table row indices[t] into out for every position; padding flows
// through row 0 like any other row.
void embedding_forward(const EncodedWord& input, const Tensor2& table, std::vector<double>& out);

class Model {
public:
    virtual ~Model() = default;

    virtual ModelKind kind() const = 0;
    virtual int hidden_size() const = 0;

    const Vocabulary& vocab() const { return vocab_; }
    int max_len() const { return max_len_; }
    int embedding_dim() const { return embedding_dim_; }

    // Returns p(utrum) and fills the trace.
    virtual double forward(const EncodedWord& input, ForwardTrace& trace) const = 0;
    double forward(const EncodedWord& input) const;

    // Accumulates d bce_loss / d theta into the given tensors, which must
    // mirror parameters() (shape and order). Virtual so tests can inject
    // faults into the analytic gradients.
    virtual void backward_to(const ForwardTrace& trace, int label,
                             const std::vector<Tensor2*>& grads) const = 0;

    // Accumulates into every Param's own grad buffer.
    void backward(const ForwardTrace& trace, int label);

    // Fixed order: embedding, layer parameters, readout. The order is part of
    // the model file layout.
    std::vector<Param*> parameters();
    std::vector<const Param*> parameters() const;

    void zero_grads();
    std::int64_t parameter_count() const;

    // Encode + forward for raw words; unknown characters map to the unknown
    // embedding row, words longer than max_len are rejected.
    double predict(std::string_view word) const;

protected:
    Model(Vocabulary vocab, int max_len, int embedding_dim);
    virtual void collect_params(std::vector<Param*>& out) = 0;

    Vocabulary vocab_;
    int max_len_;
    int embedding_dim_;
    Param embedding_;  // (vocab size + 2) x d_emb; rows: pad, chars, unk
};

class DenseModel final : public Model {
public:
    DenseModel(Vocabulary vocab, int max_len, int embedding_dim, int hidden_size,
               std::uint64_t seed);

    ModelKind kind() const override { return ModelKind::dense; }
    int hidden_size() const override { return hidden_w_.value.rows; }

    using Model::forward;
    double forward(const EncodedWord& input, ForwardTrace& trace) const override;
    void backward_to(const ForwardTrace& trace, int label,
                     const std::vector<Tensor2*>& grads) const override;

protected:
    void collect_params(std::vector<Param*>& out) override;

private:
    Param hidden_w_;  // hidden x (max_len * d_emb)
    Param hidden_b_;  // 1 x hidden
    Param out_w_;     // 1 x hidden
    Param out_b_;     // 1 x 1
};

// Gate parameter triple: pre-activation = w_in * x_t + w_rec * h_prev + bias
// (the GRU candidate multiplies w_rec with the reset-gated state instead).
struct GateParam {
    Param w_in;   // hidden x d_emb
    Param w_rec;  // hidden x hidden
    Param bias;   // 1 x hidden
};

class RecurrentModel : public Model {
public:
    // Gate order: LSTM {input, forget, output, candidate},
    //             GRU  {update, reset, candidate}.
    RecurrentModel(ModelKind kind, Vocabulary vocab, int max_len, int embedding_dim,
                   int hidden_size, std::uint64_t seed);

    ModelKind kind() const override { return kind_; }
    int hidden_size() const override { return hidden_size_; }
    int n_gates() const { return kind_ == ModelKind::lstm ? 4 : 3; }

    GateParam& gate(int g) { return gates_[static_cast<std::size_t>(g)]; }
    const GateParam& gate(int g) const { return gates_[static_cast<std::size_t>(g)]; }

    using Model::forward;
    double forward(const EncodedWord& input, ForwardTrace& trace) const override;
    void backward_to(const ForwardTrace& trace, int label,
                     const std::vector<Tensor2*>& grads) const override;

    // One cell transition. gate_pre/gate_act/c_tanh may be null when no trace
    // is needed; c_prev/c_out are ignored for the GRU.
    void cell_step(const double* x, const double* h_prev, const double* c_prev, double* h_out,
                   double* c_out, double* gate_pre, double* gate_act, double* c_tanh,
                   double* scratch) const;

protected:
    void collect_params(std::vector<Param*>& out) override;

private:
    ModelKind kind_;
    int hidden_size_;
    std::vector<GateParam> gates_;
    Param readout_w_;  // 1 x (max_len * hidden)
    Param readout_b_;  // 1 x 1
};

// Standalone cell transitions for oracle tests.
struct LstmStepResult {
    std::vector<double> h;
    std::vector<double> c;
};
LstmStepResult lstm_step(std::span<const double> x, std::span<const double> h_prev,
                         std::span<const double> c_prev, const RecurrentModel& m);
std::vector<double> gru_step(std::span<const double> x, std::span<const double> h_prev,
                             const RecurrentModel& m);

// Paper defaults: d_emb 60; hidden 128 (dense) or 64 (GRU/LSTM).
std::unique_ptr<Model> make_model(ModelKind kind, Vocabulary vocab, int max_len,
                                  int embedding_dim, int hidden_size, std::uint64_t seed);

std::int64_t count_parameters(const Model& m);

// Versioned binary container ("GNET"): header, vocabulary, named tensors,
// 64-bit FNV-1a checksum over all preceding bytes. Load rejects bad magic,
// unknown versions, checksum mismatches and truncated or malformed bodies.
void save_model(const Model& m, const std::filesystem::path& path);
std::unique_ptr<Model> load_model(const std::filesystem::path& path);

// As load_model but rejects non-recurrent files (hidden-state export).
std::unique_ptr<RecurrentModel> load_recurrent_model(const std::filesystem::path& path);

}  // namespace gendernet
