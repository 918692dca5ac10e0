use serde::Serialize;

/// One line of a fit report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub parameter: String,
    pub value: f64,
    pub sigma: f64,
    pub unit: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FitReport {
    pub rows: Vec<ReportRow>,
}

impl FitReport {
    pub fn push(&mut self, parameter: &str, value: f64, sigma: f64, unit: &str) {
        self.rows.push(ReportRow {
            parameter: parameter.into(),
            value,
            sigma,
            unit: unit.into(),
        });
    }

    /// Aligned `parameter value sigma unit` table.
    pub fn to_text(&self) -> String {
        let mut out = format!("{:<20} {:>16} {:>16} {}\n", "parameter", "value", "sigma", "unit");
        for r in &self.rows {
            out.push_str(&format!(
                "{:<20} {:>16.8e} {:>16.8e} {}\n",
                r.parameter, r.value, r.sigma, r.unit
            ));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report rows serialize")
    }
}
