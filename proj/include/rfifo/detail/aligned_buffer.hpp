#pragma once

#include <cstddef>
#include <memory>
#include <new>

namespace rfifo::detail {

/// Fixed-size, cache-line aligned array of default-constructed T.
template <typename T, std::size_t Alignment = 64>
class AlignedBuffer {
    struct Deleter {
        std::size_t count;
        void operator()(T *p) const noexcept {
            std::destroy_n(p, count);
            ::operator delete(p, std::align_val_t{Alignment});
        }
    };

    std::unique_ptr<T[], Deleter> data_;
    std::size_t size_ = 0;

   public:
    AlignedBuffer() : data_(nullptr, Deleter{0}) {
    }

    explicit AlignedBuffer(std::size_t n)
        : data_(static_cast<T *>(::operator new(n * sizeof(T), std::align_val_t{Alignment})), Deleter{n}),
          size_(n) {
        std::uninitialized_default_construct_n(data_.get(), n);
    }

    T &operator[](std::size_t i) noexcept {
        return data_[i];
    }
    T const &operator[](std::size_t i) const noexcept {
        return data_[i];
    }
    T *data() noexcept {
        return data_.get();
    }
    [[nodiscard]] std::size_t size() const noexcept {
        return size_;
    }
};

}  // namespace rfifo::detail
