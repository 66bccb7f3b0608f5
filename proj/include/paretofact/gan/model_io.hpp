#pragma once

#include <filesystem>

#include "paretofact/common/cgmf.hpp"
#include "paretofact/gan/bundle.hpp"
#include "paretofact/gan/target.hpp"

namespace paretofact::gan {

cgmf::File bundle_to_file(const ModelBundle& bundle);
ModelBundle bundle_from_file(const cgmf::File& file);

void save_bundle(const std::filesystem::path& path, const ModelBundle& bundle);
// Throws FormatError on a malformed file or a header that disagrees with
// the stored tensors.
ModelBundle load_bundle(const std::filesystem::path& path);

void save_target(const std::filesystem::path& path, const TargetModel& model);
TargetModel load_target(const std::filesystem::path& path);

}  // namespace paretofact::gan
