#include "rfifo/strict_queue.hpp"

#include <cassert>
#include <stdexcept>

namespace rfifo {

StrictQueue::StrictQueue(std::size_t capacity) : buffer_(capacity, kBottom) {
    if (capacity == 0) {
        throw std::invalid_argument("StrictQueue: capacity must be positive");
    }
}

bool StrictQueue::push(Element e, OpLog *log) {
    assert(e != kBottom);
    std::scoped_lock lock(mutex_);
    if (size_ == buffer_.size()) {
        return false;
    }
    auto tail = head_ + size_;
    if (tail >= buffer_.size()) {
        tail -= buffer_.size();
    }
    buffer_[tail] = e;
    ++size_;
    if (log != nullptr) {
        log->record(OpKind::push, e);
    }
    return true;
}

std::optional<Element> StrictQueue::pop(OpLog *log) {
    std::scoped_lock lock(mutex_);
    if (size_ == 0) {
        if (log != nullptr) {
            log->record(OpKind::pop, kBottom);
        }
        return std::nullopt;
    }
    auto const e = buffer_[head_];
    if (++head_ == buffer_.size()) {
        head_ = 0;
    }
    --size_;
    if (log != nullptr) {
        log->record(OpKind::pop, e);
    }
    return e;
}

std::size_t StrictQueue::size() const {
    std::scoped_lock lock(mutex_);
    return size_;
}

}  // namespace rfifo
