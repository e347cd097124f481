#include "transport.hpp"

#include <condition_variable>
#include <cstring>
#include <deque>
#include <map>
#include <mutex>

namespace sellkit {

struct TransportOp {
    std::mutex mtx;
    std::condition_variable cv;
    bool done = false;
    void* recv_buf = nullptr;
    std::size_t recv_bytes = 0;

    void mark_done() {
        {
            std::lock_guard<std::mutex> lk(mtx);
            done = true;
        }
        cv.notify_all();
    }
    void wait_done() {
        std::unique_lock<std::mutex> lk(mtx);
        cv.wait(lk, [&] { return done; });
    }
    bool is_done() {
        std::lock_guard<std::mutex> lk(mtx);
        return done;
    }
};

namespace {

class InProcessTransport final : public Transport {
public:
    explicit InProcessTransport(int nranks) : nranks_(nranks) {
        SK_REQUIRE(nranks >= 1, errc::invalid_arg, "transport needs at least one rank");
    }

    Request post_send(int from, int to, const void* data, std::size_t bytes) override {
        check_rank(from);
        check_rank(to);
        auto op = std::make_shared<TransportOp>();
        {
            std::lock_guard<std::mutex> lk(mtx_);
            auto& ch = channels_[key(from, to)];
            if (!ch.pending_recvs.empty()) {
                // a receiver is already waiting; in-order per pair
                auto recv = ch.pending_recvs.front();
                ch.pending_recvs.pop_front();
                SK_REQUIRE(recv->recv_bytes == bytes, errc::transport,
                           "message size does not match posted receive");
                std::memcpy(recv->recv_buf, data, bytes);
                recv->mark_done();
            } else {
                ch.messages.emplace_back(static_cast<const std::byte*>(data),
                                         static_cast<const std::byte*>(data) + bytes);
            }
        }
        op->mark_done();  // buffered send
        return Request{op};
    }

    Request post_recv(int from, int to, void* data, std::size_t bytes) override {
        check_rank(from);
        check_rank(to);
        auto op = std::make_shared<TransportOp>();
        op->recv_buf = data;
        op->recv_bytes = bytes;
        {
            std::lock_guard<std::mutex> lk(mtx_);
            auto& ch = channels_[key(from, to)];
            if (!ch.messages.empty()) {
                const auto& msg = ch.messages.front();
                SK_REQUIRE(msg.size() == bytes, errc::transport,
                           "message size does not match posted receive");
                std::memcpy(data, msg.data(), bytes);
                ch.messages.pop_front();
                op->mark_done();
            } else {
                ch.pending_recvs.push_back(op);
            }
        }
        return Request{op};
    }

    bool test(const Request& r) override { return r.op && r.op->is_done(); }

    void complete(const Request& r) override {
        SK_REQUIRE(bool(r), errc::transport, "empty transport request");
        r.op->wait_done();
    }

    void barrier(int rank) override {
        check_rank(rank);
        std::unique_lock<std::mutex> lk(mtx_);
        const std::uint64_t gen = barrier_gen_;
        if (++barrier_count_ == nranks_) {
            barrier_count_ = 0;
            ++barrier_gen_;
            barrier_cv_.notify_all();
        } else {
            barrier_cv_.wait(lk, [&] { return barrier_gen_ != gen; });
        }
    }

    int nranks() const override { return nranks_; }

private:
    struct Channel {
        std::deque<std::vector<std::byte>> messages;
        std::deque<std::shared_ptr<TransportOp>> pending_recvs;
    };

    void check_rank(int r) const {
        SK_REQUIRE(r >= 0 && r < nranks_, errc::transport, "rank out of range");
    }
    std::uint64_t key(int from, int to) const {
        return (std::uint64_t(std::uint32_t(from)) << 32) | std::uint32_t(to);
    }

    int nranks_;
    std::mutex mtx_;
    std::map<std::uint64_t, Channel> channels_;
    std::condition_variable barrier_cv_;
    int barrier_count_ = 0;
    std::uint64_t barrier_gen_ = 0;
};

} // namespace

std::shared_ptr<Transport> make_inprocess_transport(int nranks) {
    return std::make_shared<InProcessTransport>(nranks);
}

struct RecordingTransport::Impl {
    std::shared_ptr<Transport> inner;
    mutable std::mutex mtx;
    std::map<std::pair<int, int>, std::uint64_t> count;
    std::map<std::pair<int, int>, std::uint64_t> bytes;
};

RecordingTransport::RecordingTransport(std::shared_ptr<Transport> inner)
    : impl_(std::make_unique<Impl>()) {
    SK_REQUIRE(inner != nullptr, errc::invalid_arg, "recording transport needs an inner transport");
    impl_->inner = std::move(inner);
}

RecordingTransport::~RecordingTransport() = default;

Transport::Request RecordingTransport::post_send(int from, int to, const void* data,
                                                 std::size_t bytes) {
    {
        std::lock_guard<std::mutex> lk(impl_->mtx);
        impl_->count[{from, to}]++;
        impl_->bytes[{from, to}] += bytes;
    }
    return impl_->inner->post_send(from, to, data, bytes);
}

Transport::Request RecordingTransport::post_recv(int from, int to, void* data, std::size_t bytes) {
    return impl_->inner->post_recv(from, to, data, bytes);
}

bool RecordingTransport::test(const Request& r) { return impl_->inner->test(r); }
void RecordingTransport::complete(const Request& r) { impl_->inner->complete(r); }
void RecordingTransport::barrier(int rank) { impl_->inner->barrier(rank); }
int RecordingTransport::nranks() const { return impl_->inner->nranks(); }

std::uint64_t RecordingTransport::total_bytes_sent() const {
    std::lock_guard<std::mutex> lk(impl_->mtx);
    std::uint64_t total = 0;
    for (const auto& [k, v] : impl_->bytes) total += v;
    return total;
}

std::uint64_t RecordingTransport::message_count(int from, int to) const {
    std::lock_guard<std::mutex> lk(impl_->mtx);
    auto it = impl_->count.find({from, to});
    return it == impl_->count.end() ? 0 : it->second;
}

std::uint64_t RecordingTransport::messages_sent_by(int rank) const {
    std::lock_guard<std::mutex> lk(impl_->mtx);
    std::uint64_t total = 0;
    for (const auto& [k, v] : impl_->count)
        if (k.first == rank) total += v;
    return total;
}

void RecordingTransport::reset_counters() {
    std::lock_guard<std::mutex> lk(impl_->mtx);
    impl_->count.clear();
    impl_->bytes.clear();
}

} // namespace sellkit
