#pragma once

#include <string>

#include "zb/branch.hpp"

namespace zb {

// Scalable figures of the computed geometry.  All coordinates are formatted
// at fixed precision and elements are emitted left-to-right within each
// layer, so re-rendering the same input is byte-identical.

// Upper half-plane view of a Ford-type domain: real axis, every boundary
// sphere as a circular arc, and the common exterior shaded down to the
// envelope.  An empty domain renders as the bare axis.
std::string domain_svg_text(const FordDomain& domain);

// Strip view of a branch family over its extended group: the domain rendering
// plus strip walls, one vertical base line per distinct base point, a facing
// stripe per branch, and branch labels in published numbering.
std::string branch_svg_text(const BranchSystem& sys, const AuxiliaryGroup& aux);

// Atomic file variants.  Throw IoError on write failure.
void render_domain_svg(const FordDomain& domain, const std::string& path);
void render_branch_svg(const BranchSystem& sys, const AuxiliaryGroup& aux,
                       const std::string& path);

}  // namespace zb
