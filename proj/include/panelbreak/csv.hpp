#ifndef PANELBREAK_CSV_HPP
#define PANELBREAK_CSV_HPP

#include <string>

#include "panelbreak/lse.hpp"
#include "panelbreak/panel.hpp"

namespace panelbreak {

// Wide panel format: one row per series, n numeric columns.
PanelData read_panel_csv(const std::string& path);

// Companion covariate file: m*n rows, d columns, row-major (k, t) order.
void read_covariates_csv(const std::string& path, PanelData& panel);

void write_panel_csv(const std::string& path, const PanelData& panel);
void write_covariates_csv(const std::string& path, const PanelData& panel);

// Two-column criterion profile (b_index, value).
void write_profile_csv(const std::string& path, const BreakEstimate& est);

}  // namespace panelbreak

#endif
