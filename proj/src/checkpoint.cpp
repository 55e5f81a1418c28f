#include "nlstm/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace nlstm {

namespace {

constexpr char kMagic[8] = {'N', 'L', 'S', 'T', 'M', 'C', 'K', '1'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& out, uint32_t v) {
    char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 4);
}

void put_u64(std::ostream& out, uint64_t v) {
    char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out.write(b, 8);
}

void put_f64(std::ostream& out, double d) {
    uint64_t bits;
    std::memcpy(&bits, &d, 8);
    put_u64(out, bits);
}

uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw DataError("checkpoint: truncated at offset " + std::to_string(in.tellg()));
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(b[i]) << (8 * i);
    return v;
}

uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8))
        throw DataError("checkpoint: truncated at offset " + std::to_string(in.tellg()));
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in) {
    const uint64_t bits = get_u64(in);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
}

uint32_t arch_code(Architecture a) {
    switch (a) {
        case Architecture::Lstm: return 0;
        case Architecture::Stacked: return 1;
        case Architecture::Nlstm: return 2;
    }
    return 0;
}

Architecture arch_from_code(uint32_t c) {
    switch (c) {
        case 0: return Architecture::Lstm;
        case 1: return Architecture::Stacked;
        case 2: return Architecture::Nlstm;
    }
    throw DataError("checkpoint: unknown architecture code " + std::to_string(c));
}

}  // namespace

void save_checkpoint(const Model& m, std::ostream& out) {
    out.write(kMagic, 8);
    put_u32(out, kVersion);
    put_u32(out, arch_code(m.config.architecture));
    put_u32(out, static_cast<uint32_t>(m.config.layers));
    put_u32(out, static_cast<uint32_t>(m.config.nesting_depth));
    put_u32(out, static_cast<uint32_t>(m.config.cell_size));
    put_u32(out, static_cast<uint32_t>(m.config.input_size));
    put_u32(out, static_cast<uint32_t>(m.config.output_size));
    put_u64(out, m.config.seed);

    uint32_t count = 0;
    m.visit_tensors([&count](const std::string&, const std::vector<double>&, int, int) { ++count; });
    put_u32(out, count);

    m.visit_tensors([&out](const std::string& name, const std::vector<double>& data, int rows,
                           int cols) {
        put_u32(out, static_cast<uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(out, static_cast<uint32_t>(rows));
        put_u32(out, static_cast<uint32_t>(cols));
        for (double d : data) put_f64(out, d);
    });
    if (!out) throw DataError("checkpoint: write failed");
}

void save_checkpoint(const Model& m, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("checkpoint: cannot open '" + path + "' for writing");
    save_checkpoint(m, f);
}

Model load_checkpoint(std::istream& in) {
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        throw DataError("checkpoint: bad magic at offset 0");
    const uint32_t version = get_u32(in);
    if (version != kVersion)
        throw DataError("checkpoint: unsupported version " + std::to_string(version));

    ModelConfig config;
    config.architecture = arch_from_code(get_u32(in));
    config.layers = static_cast<int>(get_u32(in));
    config.nesting_depth = static_cast<int>(get_u32(in));
    config.cell_size = static_cast<int>(get_u32(in));
    config.input_size = static_cast<int>(get_u32(in));
    config.output_size = static_cast<int>(get_u32(in));
    config.seed = get_u64(in);
    validate(config);

    // Build the structural skeleton, then fill tensors strictly in visit order.
    Model m;
    m.config = config;
    const int levels = config.architecture == Architecture::Nlstm ? config.nesting_depth : 1;
    for (int l = 0; l < config.layers; ++l)
        m.cells.push_back(
            make_cell(l == 0 ? config.input_size : config.cell_size, config.cell_size, levels));
    m.proj_w = Matrix(config.cell_size, config.output_size);
    m.proj_b = Vector(config.output_size);

    const uint32_t count = get_u32(in);
    uint32_t expected = 0;
    m.visit_tensors([&expected](const std::string&, std::vector<double>&, int, int) { ++expected; });
    if (count != expected)
        throw DataError("checkpoint: tensor count " + std::to_string(count) + " does not match model (" +
                        std::to_string(expected) + ")");

    m.visit_tensors([&in](const std::string& name, std::vector<double>& data, int rows, int cols) {
        const uint32_t name_len = get_u32(in);
        std::string got(name_len, '\0');
        if (!in.read(got.data(), name_len))
            throw DataError("checkpoint: truncated tensor name at offset " + std::to_string(in.tellg()));
        if (got != name)
            throw DataError("checkpoint: tensor '" + got + "' where '" + name + "' was expected");
        const uint32_t r = get_u32(in);
        const uint32_t c = get_u32(in);
        if (static_cast<int>(r) != rows || static_cast<int>(c) != cols)
            throw DataError("checkpoint: tensor '" + name + "' shape " + std::to_string(r) + "x" +
                            std::to_string(c) + " does not match model " + std::to_string(rows) + "x" +
                            std::to_string(cols));
        for (double& d : data) d = get_f64(in);
    });
    return m;
}

Model load_checkpoint(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("checkpoint: cannot open '" + path + "'");
    return load_checkpoint(f);
}

}  // namespace nlstm
