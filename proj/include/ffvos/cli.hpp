#pragma once

namespace ffvos::cli {

/// Exit codes: 0 success, 2 configuration error, 3 ingestion error,
/// 4 pipeline failure. Failures print {"error": code, "frame": i, ...} on stderr.
int main(int argc, char** argv);

}  // namespace ffvos::cli
