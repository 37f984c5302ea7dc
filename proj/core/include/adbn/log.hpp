#pragma once

#include <functional>
#include <string_view>

namespace adbn {

// Non-fatal diagnostics. The default sink prints "warning: ..." to stderr.
using WarningSink = std::function<void(std::string_view)>;

// Returns the previous sink. An empty function silences warnings.
WarningSink set_warning_sink(WarningSink sink);
void warn(std::string_view message);

}  // namespace adbn
