#include "rfsad/diagnostics.hpp"

#include <iostream>
#include <mutex>

namespace rfsad {
namespace {

std::mutex& handler_mutex()
{
    static std::mutex m;
    return m;
}

WarningHandler& current_handler()
{
    static WarningHandler handler = [](std::string_view msg) { std::cerr << "warning: " << msg << '\n'; };
    return handler;
}

} // namespace

WarningHandler set_warning_handler(WarningHandler handler)
{
    std::lock_guard lock(handler_mutex());
    auto previous = std::move(current_handler());
    current_handler() = std::move(handler);
    return previous;
}

void warn(std::string_view message)
{
    std::lock_guard lock(handler_mutex());
    if (current_handler())
        current_handler()(message);
}

struct WarningCapture::State {
    mutable std::mutex mutex;
    std::vector<std::string> messages;
};

WarningCapture::WarningCapture() : state_(new State)
{
    previous_ = set_warning_handler([s = state_](std::string_view msg) {
        std::lock_guard lock(s->mutex);
        s->messages.emplace_back(msg);
    });
}

WarningCapture::~WarningCapture()
{
    set_warning_handler(std::move(previous_));
    delete state_;
}

std::vector<std::string> WarningCapture::messages() const
{
    std::lock_guard lock(state_->mutex);
    return state_->messages;
}

} // namespace rfsad
