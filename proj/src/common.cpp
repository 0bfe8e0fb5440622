#include "cmp/common.hpp"

#include <iostream>
#include <memory>
#include <mutex>

namespace cmp {

namespace {

std::mutex handler_mutex;

WarningHandler &handler_slot()
{
    static WarningHandler handler = [](const std::string &msg) {
        std::cerr << "warning: " << msg << "\n";
    };
    return handler;
}

} // namespace

void warn(const std::string &message)
{
    WarningHandler h;
    {
        std::lock_guard<std::mutex> lock(handler_mutex);
        h = handler_slot();
    }
    if (h)
        h(message);
}

WarningHandler set_warning_handler(WarningHandler handler)
{
    std::lock_guard<std::mutex> lock(handler_mutex);
    WarningHandler prev = handler_slot();
    handler_slot() = std::move(handler);
    return prev;
}

struct WarningCapture::State {
    mutable std::mutex mutex;
    std::vector<std::string> messages;
};

WarningCapture::WarningCapture()
    : state_(std::make_shared<State>())
{
    auto state = state_;
    previous_ = set_warning_handler([state](const std::string &msg) {
        std::lock_guard<std::mutex> lock(state->mutex);
        state->messages.push_back(msg);
    });
}

WarningCapture::~WarningCapture()
{
    set_warning_handler(previous_);
}

std::vector<std::string> WarningCapture::messages() const
{
    std::lock_guard<std::mutex> lock(state_->mutex);
    return state_->messages;
}

} // namespace cmp
