#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "types.hpp"

namespace sellkit {

/// Duplex message interface between simulated ranks. Messages between a rank
/// pair are delivered in posting order. Sends are buffered and complete
/// immediately; receives complete when a matching message arrives.
class Transport {
public:
    struct Request {
        std::shared_ptr<struct TransportOp> op;
        explicit operator bool() const { return op != nullptr; }
    };

    virtual ~Transport() = default;

    virtual Request post_send(int from, int to, const void* data, std::size_t bytes) = 0;
    virtual Request post_recv(int from, int to, void* data, std::size_t bytes) = 0;
    virtual bool test(const Request& r) = 0;
    virtual void complete(const Request& r) = 0;
    virtual void barrier(int rank) = 0;
    virtual int nranks() const = 0;
};

std::shared_ptr<Transport> make_inprocess_transport(int nranks);

/// Transport decorator that logs message counts and byte volumes, used by
/// communication-accounting tests.
class RecordingTransport : public Transport {
public:
    explicit RecordingTransport(std::shared_ptr<Transport> inner);
    ~RecordingTransport() override;

    Request post_send(int from, int to, const void* data, std::size_t bytes) override;
    Request post_recv(int from, int to, void* data, std::size_t bytes) override;
    bool test(const Request& r) override;
    void complete(const Request& r) override;
    void barrier(int rank) override;
    int nranks() const override;

    std::uint64_t total_bytes_sent() const;
    std::uint64_t message_count(int from, int to) const;
    std::uint64_t messages_sent_by(int rank) const;
    void reset_counters();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace sellkit
