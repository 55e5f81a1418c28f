#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "nlstm/model.hpp"

namespace nlstm {

// Byte-level character vocabulary: the sorted set of distinct bytes of the
// training split, ids dense in [0, size). For ASCII corpora byte order equals
// code-point order.
struct CharVocab {
    std::vector<unsigned char> chars;  // sorted
    std::array<int, 256> index{};      // byte -> id, -1 if absent

    static CharVocab build(std::string_view train_text);
    int size() const { return static_cast<int>(chars.size()); }
    int id(unsigned char c) const { return index[c]; }
    unsigned char at(int i) const { return chars[static_cast<size_t>(i)]; }
    std::vector<int> encode(std::string_view text) const;  // DataError on out-of-vocabulary bytes
};

struct CorpusSplits {
    CharVocab vocab;
    std::vector<int> train, valid, test;
};

std::string read_file(const std::string& path);

// Vocabulary from the training split only; an out-of-vocabulary byte in
// valid/test is a hard error listing the offenders.
CorpusSplits load_text_corpus(const std::string& train_path, const std::string& valid_path,
                              const std::string& test_path);

// Cuts the token stream into consecutive disjoint windows of seq_len inputs
// with targets shifted by one, groups them batch_size at a time, and drops
// the ragged tail. Every surviving token appears in exactly one input window.
std::vector<SequenceBatch> batch_nonoverlapping(const std::vector<int>& tokens, int batch_size,
                                                int seq_len);

// ---- MNIST ----

struct MnistData {
    std::vector<std::vector<double>> images;  // 784 values in [0,1], row-major
    std::vector<int> labels;
};

// IDX files: big-endian dims, magic 0x00000803 (images) / 0x00000801 (labels).
// Pixel bytes map to [0,1] by /255. Truncated or mismatched files error with
// the offending offset rather than returning partial data.
MnistData load_idx(const std::string& images_path, const std::string& labels_path);

// 20 steps of 49 pixels: per quadrant (top-left, top-right, bottom-left,
// bottom-right), first a 7x7 glimpse at even rows/columns of the 14x14
// quadrant, then the quadrant's four 7x7 sub-blocks, each flattened row-major.
struct GlimpseSequence {
    Matrix steps;  // 20 x 49
    int label = -1;
};

GlimpseSequence make_glimpses(const std::vector<double>& image784, int label);

// Groups glimpse sequences into dense batches; keep_remainder controls
// whether a final smaller batch is emitted (evaluation) or dropped (training).
std::vector<SequenceBatch> batch_glimpses(const std::vector<GlimpseSequence>& seqs, int batch_size,
                                          bool keep_remainder);

}  // namespace nlstm
