#include "openobj/tensor.hpp"

#include <cstring>
#include <fstream>

namespace openobj {

namespace {
constexpr char kMagic[4] = {'O', 'B', 'N', 'T'};
constexpr uint8_t kVersion = 1;
constexpr size_t kMaxNdim = 4;
}  // namespace

size_t dtype_size(DType d) {
    switch (d) {
        case DType::F32: return 4;
        case DType::F64: return 8;
        case DType::U8: return 1;
        case DType::U16: return 2;
        case DType::I32: return 4;
    }
    throw TensorError("unknown dtype code " + std::to_string(int(d)));
}

TensorBlob::TensorBlob(DType dtype, std::vector<uint64_t> shape)
    : dtype_(dtype), shape_(std::move(shape)) {
    if (shape_.size() > kMaxNdim)
        throw TensorError("ndim > 4");
    data_.resize(numel() * dtype_size(dtype_));
}

uint64_t TensorBlob::numel() const {
    uint64_t n = 1;
    for (uint64_t s : shape_) n *= s;
    return n;
}

TensorBlob TensorBlob::from_f32(std::vector<uint64_t> shape, const std::vector<float>& v) {
    TensorBlob t(DType::F32, std::move(shape));
    if (t.numel() != v.size()) throw TensorError("from_f32: element count mismatch");
    std::memcpy(t.data_.data(), v.data(), t.data_.size());
    return t;
}

TensorBlob TensorBlob::from_f64(std::vector<uint64_t> shape, const std::vector<double>& v) {
    TensorBlob t(DType::F64, std::move(shape));
    if (t.numel() != v.size()) throw TensorError("from_f64: element count mismatch");
    std::memcpy(t.data_.data(), v.data(), t.data_.size());
    return t;
}

TensorBlob TensorBlob::from_u8(std::vector<uint64_t> shape, const std::vector<uint8_t>& v) {
    TensorBlob t(DType::U8, std::move(shape));
    if (t.numel() != v.size()) throw TensorError("from_u8: element count mismatch");
    std::memcpy(t.data_.data(), v.data(), t.data_.size());
    return t;
}

std::vector<float> TensorBlob::as_f32() const {
    if (dtype_ != DType::F32) throw TensorError("as_f32: dtype is not f32");
    std::vector<float> v(numel());
    std::memcpy(v.data(), data_.data(), data_.size());
    return v;
}

std::vector<double> TensorBlob::as_f64() const {
    if (dtype_ != DType::F64) throw TensorError("as_f64: dtype is not f64");
    std::vector<double> v(numel());
    std::memcpy(v.data(), data_.data(), data_.size());
    return v;
}

void serialize_tensor(std::vector<uint8_t>& out, const TensorBlob& t) {
    out.insert(out.end(), kMagic, kMagic + 4);
    out.push_back(kVersion);
    out.push_back(uint8_t(t.dtype()));
    out.push_back(uint8_t(t.ndim()));
    for (uint64_t s : t.shape())
        for (int b = 0; b < 8; ++b) out.push_back(uint8_t(s >> (8 * b)));
    out.insert(out.end(), t.raw().begin(), t.raw().end());
}

TensorBlob deserialize_tensor(const uint8_t* data, size_t size, size_t& offset) {
    auto need = [&](size_t n) {
        if (offset + n > size) throw TensorError("truncated tensor");
        return data + offset;
    };
    const uint8_t* p = need(7);
    if (std::memcmp(p, kMagic, 4) != 0) throw TensorError("bad magic");
    if (p[4] != kVersion) throw TensorError("unsupported version " + std::to_string(p[4]));
    uint8_t dtype_code = p[5];
    if (dtype_code > uint8_t(DType::I32)) throw TensorError("unknown dtype");
    uint8_t ndim = p[6];
    if (ndim > 4) throw TensorError("ndim > 4");
    offset += 7;

    std::vector<uint64_t> shape(ndim);
    p = need(size_t(ndim) * 8);
    for (int i = 0; i < ndim; ++i) {
        uint64_t s = 0;
        for (int b = 0; b < 8; ++b) s |= uint64_t(p[i * 8 + b]) << (8 * b);
        shape[i] = s;
    }
    offset += size_t(ndim) * 8;

    TensorBlob t(DType(dtype_code), shape);
    p = need(t.byte_size());
    std::memcpy(t.raw().data(), p, t.byte_size());
    offset += t.byte_size();
    return t;
}

TensorBlob read_tensor(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw TensorError("cannot open " + path.string());
    std::vector<uint8_t> buf((std::istreambuf_iterator<char>(f)),
                             std::istreambuf_iterator<char>());
    size_t offset = 0;
    TensorBlob t = deserialize_tensor(buf.data(), buf.size(), offset);
    if (offset != buf.size()) throw TensorError("trailing bytes in " + path.string());
    return t;
}

void write_tensor(const std::filesystem::path& path, const TensorBlob& t) {
    std::vector<uint8_t> buf;
    serialize_tensor(buf, t);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw TensorError("cannot write " + path.string());
    f.write(reinterpret_cast<const char*>(buf.data()), std::streamsize(buf.size()));
}

}  // namespace openobj
