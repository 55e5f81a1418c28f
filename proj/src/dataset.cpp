#include "nlstm/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace nlstm {

CharVocab CharVocab::build(std::string_view train_text) {
    if (train_text.empty()) throw DataError("build_vocab: empty training text");
    std::array<bool, 256> seen{};
    for (unsigned char c : train_text) seen[c] = true;
    CharVocab v;
    v.index.fill(-1);
    for (int c = 0; c < 256; ++c) {
        if (seen[static_cast<size_t>(c)]) {
            v.index[static_cast<size_t>(c)] = static_cast<int>(v.chars.size());
            v.chars.push_back(static_cast<unsigned char>(c));
        }
    }
    return v;
}

std::vector<int> CharVocab::encode(std::string_view text) const {
    std::vector<int> out;
    out.reserve(text.size());
    std::set<unsigned char> missing;
    for (unsigned char c : text) {
        const int i = index[c];
        if (i < 0)
            missing.insert(c);
        else
            out.push_back(i);
    }
    if (!missing.empty()) {
        std::ostringstream msg;
        msg << "out-of-vocabulary bytes:";
        for (unsigned char c : missing) {
            msg << " 0x" << std::hex << static_cast<int>(c);
            if (c >= 0x20 && c < 0x7f) msg << " ('" << static_cast<char>(c) << "')";
        }
        throw DataError(msg.str());
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

CorpusSplits load_text_corpus(const std::string& train_path, const std::string& valid_path,
                              const std::string& test_path) {
    const std::string train_text = read_file(train_path);
    CorpusSplits s;
    s.vocab = CharVocab::build(train_text);
    s.train = s.vocab.encode(train_text);
    try {
        if (!valid_path.empty()) s.valid = s.vocab.encode(read_file(valid_path));
        if (!test_path.empty()) s.test = s.vocab.encode(read_file(test_path));
    } catch (const DataError& e) {
        throw DataError(std::string("valid/test split not covered by the training vocabulary: ") +
                        e.what());
    }
    return s;
}

std::vector<SequenceBatch> batch_nonoverlapping(const std::vector<int>& tokens, int batch_size,
                                                int seq_len) {
    if (batch_size < 1 || seq_len < 1)
        throw ConfigError("batch_nonoverlapping: batch_size and seq_len must be >= 1");
    if (static_cast<int>(tokens.size()) <= seq_len)
        throw DataError("batch_nonoverlapping: stream of " + std::to_string(tokens.size()) +
                        " tokens is too short for seq_len " + std::to_string(seq_len));
    // Window k inputs tokens[k*S, (k+1)*S); its targets are shifted by one,
    // so the last window needs token (k+1)*S to exist.
    const int64_t windows = (static_cast<int64_t>(tokens.size()) - 1) / seq_len;
    const int64_t nbatches = windows / batch_size;

    std::vector<SequenceBatch> out;
    out.reserve(static_cast<size_t>(nbatches));
    for (int64_t b = 0; b < nbatches; ++b) {
        SequenceBatch sb;
        sb.token_inputs.assign(static_cast<size_t>(seq_len),
                               std::vector<int>(static_cast<size_t>(batch_size)));
        sb.token_targets.assign(static_cast<size_t>(seq_len),
                                std::vector<int>(static_cast<size_t>(batch_size)));
        for (int lane = 0; lane < batch_size; ++lane) {
            const int64_t start = (b * batch_size + lane) * seq_len;
            for (int t = 0; t < seq_len; ++t) {
                sb.token_inputs[static_cast<size_t>(t)][static_cast<size_t>(lane)] =
                    tokens[static_cast<size_t>(start + t)];
                sb.token_targets[static_cast<size_t>(t)][static_cast<size_t>(lane)] =
                    tokens[static_cast<size_t>(start + t + 1)];
            }
        }
        out.push_back(std::move(sb));
    }
    return out;
}

namespace {

uint32_t read_be_u32(std::istream& in, const std::string& path) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw DataError("'" + path + "': truncated header at offset " + std::to_string(in.tellg()));
    return (static_cast<uint32_t>(b[0]) << 24) | (static_cast<uint32_t>(b[1]) << 16) |
           (static_cast<uint32_t>(b[2]) << 8) | static_cast<uint32_t>(b[3]);
}

}  // namespace

MnistData load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream imgf(images_path, std::ios::binary);
    if (!imgf) throw DataError("cannot open '" + images_path + "'");
    const uint32_t img_magic = read_be_u32(imgf, images_path);
    if (img_magic != 0x00000803u)
        throw DataError("'" + images_path + "': bad magic 0x" + [&] {
            std::ostringstream s;
            s << std::hex << img_magic;
            return s.str();
        }() + " at offset 0 (expected 0x803)");
    const uint32_t count = read_be_u32(imgf, images_path);
    const uint32_t rows = read_be_u32(imgf, images_path);
    const uint32_t cols = read_be_u32(imgf, images_path);
    if (rows != 28 || cols != 28)
        throw DataError("'" + images_path + "': expected 28x28 images, got " + std::to_string(rows) +
                        "x" + std::to_string(cols));

    std::ifstream labf(labels_path, std::ios::binary);
    if (!labf) throw DataError("cannot open '" + labels_path + "'");
    const uint32_t lab_magic = read_be_u32(labf, labels_path);
    if (lab_magic != 0x00000801u)
        throw DataError("'" + labels_path + "': bad magic at offset 0 (expected 0x801)");
    const uint32_t lab_count = read_be_u32(labf, labels_path);
    if (lab_count != count)
        throw DataError("label count " + std::to_string(lab_count) + " does not match image count " +
                        std::to_string(count));

    MnistData data;
    data.images.reserve(count);
    data.labels.reserve(count);
    std::vector<unsigned char> buf(784);
    for (uint32_t i = 0; i < count; ++i) {
        if (!imgf.read(reinterpret_cast<char*>(buf.data()), 784))
            throw DataError("'" + images_path + "': truncated image " + std::to_string(i) +
                            " at offset " + std::to_string(16 + static_cast<int64_t>(i) * 784));
        std::vector<double> img(784);
        for (size_t p = 0; p < 784; ++p) img[p] = buf[p] / 255.0;
        data.images.push_back(std::move(img));
        int c = labf.get();
        if (c == EOF)
            throw DataError("'" + labels_path + "': truncated label " + std::to_string(i) +
                            " at offset " + std::to_string(8 + static_cast<int64_t>(i)));
        if (c > 9)
            throw DataError("'" + labels_path + "': label " + std::to_string(c) + " out of range");
        data.labels.push_back(c);
    }
    return data;
}

GlimpseSequence make_glimpses(const std::vector<double>& image784, int label) {
    if (image784.size() != 784) throw ShapeError("make_glimpses: image must have 784 values");
    GlimpseSequence g;
    g.steps = Matrix(20, 49);
    g.label = label;
    auto px = [&image784](int r, int c) { return image784[static_cast<size_t>(r) * 28 + c]; };
    int step = 0;
    for (int q = 0; q < 4; ++q) {
        const int r0 = (q / 2) * 14;
        const int c0 = (q % 2) * 14;
        // Glimpse: even rows and columns of the 14x14 quadrant.
        for (int i = 0; i < 7; ++i)
            for (int j = 0; j < 7; ++j) g.steps(step, i * 7 + j) = px(r0 + 2 * i, c0 + 2 * j);
        ++step;
        // Full quadrant as four 7x7 sub-blocks.
        for (int sub = 0; sub < 4; ++sub) {
            const int sr = r0 + (sub / 2) * 7;
            const int sc = c0 + (sub % 2) * 7;
            for (int i = 0; i < 7; ++i)
                for (int j = 0; j < 7; ++j) g.steps(step, i * 7 + j) = px(sr + i, sc + j);
            ++step;
        }
    }
    return g;
}

std::vector<SequenceBatch> batch_glimpses(const std::vector<GlimpseSequence>& seqs, int batch_size,
                                          bool keep_remainder) {
    if (batch_size < 1) throw ConfigError("batch_glimpses: batch_size must be >= 1");
    std::vector<SequenceBatch> out;
    size_t start = 0;
    while (start < seqs.size()) {
        const size_t n = std::min(static_cast<size_t>(batch_size), seqs.size() - start);
        if (n < static_cast<size_t>(batch_size) && !keep_remainder) break;
        SequenceBatch sb;
        sb.dense_inputs.assign(20, Matrix(static_cast<int>(n), 49));
        sb.class_targets.resize(n);
        for (size_t lane = 0; lane < n; ++lane) {
            const GlimpseSequence& g = seqs[start + lane];
            for (int t = 0; t < 20; ++t)
                for (int j = 0; j < 49; ++j)
                    sb.dense_inputs[static_cast<size_t>(t)](static_cast<int>(lane), j) =
                        g.steps(t, j);
            sb.class_targets[lane] = g.label;
        }
        out.push_back(std::move(sb));
        start += n;
    }
    return out;
}

}  // namespace nlstm
