#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace rfsad {

using WarningHandler = std::function<void(std::string_view)>;

/// Installs a process-wide warning sink and returns the previous one.
/// The default sink prints "warning: <msg>" to stderr. Calls are serialized.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(std::string_view message);

/// Collects warnings emitted while alive instead of forwarding them.
class WarningCapture {
public:
    WarningCapture();
    ~WarningCapture();
    WarningCapture(const WarningCapture&) = delete;
    WarningCapture& operator=(const WarningCapture&) = delete;

    [[nodiscard]] std::vector<std::string> messages() const;

private:
    struct State;
    State* state_;
    WarningHandler previous_;
};

} // namespace rfsad
