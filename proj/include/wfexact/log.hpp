#pragma once

#include <functional>
#include <string_view>

namespace wfexact {

using LogSink = std::function<void(std::string_view)>;

/// Replace the warning sink (default: one line on std::clog). Pass an empty
/// function to silence warnings.
void set_log_sink(LogSink sink);
void log_warning(std::string_view message);

}  // namespace wfexact
