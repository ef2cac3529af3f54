#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace hycard {

struct Tensor {
    std::vector<size_t> shape;
    std::vector<double> v;

    size_t size() const { return v.size(); }
    static Tensor zeros(std::vector<size_t> shape);
};

enum class Activation { Relu, Sigmoid, Tanh };

// A stack entry. Conv1D is stride-1 with `same` padding; LSTM emits either the
// full hidden sequence or only the final state; Output applies the sigmoid head
// over a single logit.
struct LayerSpec {
    enum class Kind { Dense, Conv1D, Lstm, Act, GlobalAvgPool, Output };
    Kind kind = Kind::Dense;
    size_t in = 0;
    size_t out = 0;
    size_t kernel = 0;
    bool return_sequences = false;
    Activation act = Activation::Relu;

    static LayerSpec dense(size_t in, size_t out);
    static LayerSpec conv1d(size_t in_ch, size_t out_ch, size_t kernel);
    static LayerSpec lstm(size_t in, size_t hidden, bool return_sequences);
    static LayerSpec activation(Activation a);
    static LayerSpec global_avg_pool();
    static LayerSpec output_sigmoid();
};

// Exact analytic parameter count: Dense in*out+out, Conv1D in*out*kernel+out,
// LSTM 4*(in+hidden+1)*hidden.
long long param_count(const std::vector<LayerSpec>& stack);

// Data flowing between layers: sequences are (batch, len, ch) row-major,
// vectors are (batch, ch) with len == 0.
struct Batch {
    size_t count = 0;
    size_t len = 0;
    size_t ch = 0;
    std::vector<double> v;

    bool is_seq() const { return len > 0; }
    size_t row_elems() const { return is_seq() ? len * ch : ch; }
};

class Layer {
public:
    struct ParamRef {
        Tensor* value;
        Tensor* grad;
    };

    virtual ~Layer() = default;
    virtual LayerSpec spec() const = 0;
    virtual Batch forward(const Batch& x, bool keep_cache) = 0;
    virtual Batch backward(const Batch& dy) = 0;
    virtual std::vector<ParamRef> params() { return {}; }
    void zero_grads();
};

struct TrainConfig {
    double learning_rate = 1e-3;
    size_t epochs = 60;
    size_t batch_size = 32;
    enum class Optimizer { Sgd, Adam } optimizer = Optimizer::Adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    uint64_t seed = 0;
};

struct TrainInfo {
    double final_loss = 0.0;
    size_t steps = 0;
};

// A feed-forward stack with a sigmoid output head. Construction validates
// layer compatibility (errors name the failing layer index) and initializes
// weights deterministically from the seed: Glorot-uniform weights, zero
// biases, LSTM forget-gate bias 1.
class Network {
public:
    Network(std::vector<LayerSpec> stack, size_t input_len, size_t input_ch, uint64_t seed);

    size_t input_len() const { return input_len_; }
    size_t input_ch() const { return input_ch_; }
    const std::vector<LayerSpec>& stack() const { return stack_; }

    // rows: count x (input_len*input_ch | input_ch) row-major. Returns the
    // per-row probability of class 1.
    std::vector<double> forward(const double* rows, size_t count, bool keep_cache = false);
    const std::vector<double>& last_logits() const { return logits_; }

    // Mean binary cross-entropy of the batch, computed from logits.
    double loss(const double* rows, const int* labels, size_t count);

    // forward + backward; gradients are zeroed first and then filled with the
    // gradient of the mean BCE. Returns the batch loss.
    double backprop(const double* rows, const int* labels, size_t count);

    std::vector<Layer::ParamRef> params();
    long long parameter_count() const;

    void save(std::ostream& out) const;
    void save_file(const std::string& path) const;
    static Network load(std::istream& in);
    static Network load_file(const std::string& path);

private:
    Batch make_batch(const double* rows, size_t count) const;
    static double bce_from_logit(double z, int y);

    std::vector<LayerSpec> stack_;
    size_t input_len_ = 0;
    size_t input_ch_ = 0;
    std::vector<std::unique_ptr<Layer>> layers_;
    std::vector<double> logits_;
    std::vector<double> probs_;
};

// Mini-batch training with a fixed shuffle order per seed; bit-identical
// replays for identical inputs. Throws NumericError naming epoch and batch if
// the loss stops being finite.
TrainInfo train_network(Network& net, const double* rows, const int* labels, size_t count,
                        const TrainConfig& config);

// Max over all parameters of |analytic - numeric| / max(1e-8, |analytic| + |numeric|)
// against central finite differences (h = 1e-5) of the batch BCE.
double grad_check(const std::vector<LayerSpec>& stack, size_t input_len, size_t input_ch,
                  uint64_t seed);

// Reference architectures sized to land near the published per-model
// parameter budgets (~0.6M / ~0.5M / ~1.1M).
std::vector<LayerSpec> default_cnn_stack();
std::vector<LayerSpec> default_lstm_stack();
std::vector<LayerSpec> default_cnn_lstm_stack();

}  // namespace hycard
