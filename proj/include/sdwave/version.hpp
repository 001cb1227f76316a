#pragma once

namespace sdwave {

// Library version, echoed into every provenance header.
inline constexpr const char* kVersion = "0.1.0";
// Version of the CSV column contract documented in docs/output_schema.md;
// bumped whenever a column set or order changes.
inline constexpr const char* kSchemaVersion = "1";

}  // namespace sdwave
