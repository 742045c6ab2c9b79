#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace openobj {

// Binary tensor container used for all on-disk arrays (images, masks,
// embeddings, checkpoints). File layout: magic "OBNT", version u8 (=1),
// dtype u8, ndim u8, ndim x u64 shape (little endian), raw payload.
enum class DType : uint8_t { F32 = 0, F64 = 1, U8 = 2, U16 = 3, I32 = 4 };

size_t dtype_size(DType d);

struct TensorError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class TensorBlob {
public:
    TensorBlob() = default;
    TensorBlob(DType dtype, std::vector<uint64_t> shape);

    DType dtype() const { return dtype_; }
    const std::vector<uint64_t>& shape() const { return shape_; }
    size_t ndim() const { return shape_.size(); }
    uint64_t numel() const;
    size_t byte_size() const { return data_.size(); }

    const std::vector<uint8_t>& raw() const { return data_; }
    std::vector<uint8_t>& raw() { return data_; }

    template <typename T>
    const T* data() const { return reinterpret_cast<const T*>(data_.data()); }
    template <typename T>
    T* data() { return reinterpret_cast<T*>(data_.data()); }

    static TensorBlob from_f32(std::vector<uint64_t> shape, const std::vector<float>& v);
    static TensorBlob from_f64(std::vector<uint64_t> shape, const std::vector<double>& v);
    static TensorBlob from_u8(std::vector<uint64_t> shape, const std::vector<uint8_t>& v);

    std::vector<float> as_f32() const;
    std::vector<double> as_f64() const;

    bool operator==(const TensorBlob& o) const {
        return dtype_ == o.dtype_ && shape_ == o.shape_ && data_ == o.data_;
    }

private:
    DType dtype_ = DType::F32;
    std::vector<uint64_t> shape_;
    std::vector<uint8_t> data_;
};

TensorBlob read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const TensorBlob& t);

// In-memory (de)serialization, shared by the file I/O and checkpoint bundles.
void serialize_tensor(std::vector<uint8_t>& out, const TensorBlob& t);
TensorBlob deserialize_tensor(const uint8_t* data, size_t size, size_t& offset);

}  // namespace openobj
