//! Method-label grammar for the score tables. Teachers use the combiner
//! label as-is; students carry the "ST." prefix plus the student spec id,
//! with a "#oob" suffix when taught on out-of-bag predictions; raw-target
//! controls use the bare student spec id.

use fcomb_core::compression::TeachingStrategy;

pub const BASELINE_NAIVE: &str = "naive";
pub const BASELINE_SEASONAL_NAIVE: &str = "snaive";
pub const BASELINE_SES: &str = "ses";

pub fn student_label(teacher: &str, student_id: &str, strategy: TeachingStrategy) -> String {
    match strategy {
        TeachingStrategy::Resubstitution => format!("ST.{teacher}/{student_id}"),
        TeachingStrategy::PrequentialOob => format!("ST.{teacher}/{student_id}#oob"),
    }
}

/// Inverse of [`student_label`]: `(teacher, student_id, strategy)`.
pub fn parse_student_label(label: &str) -> Option<(String, String, TeachingStrategy)> {
    let rest = label.strip_prefix("ST.")?;
    let (teacher, student_part) = rest.split_once('/')?;
    if teacher.is_empty() || student_part.is_empty() {
        return None;
    }
    let (student, strategy) = match student_part.strip_suffix("#oob") {
        Some(student) => (student, TeachingStrategy::PrequentialOob),
        None => (student_part, TeachingStrategy::Resubstitution),
    };
    if student.is_empty() {
        return None;
    }
    Some((teacher.to_string(), student.to_string(), strategy))
}

pub fn is_student_label(label: &str) -> bool {
    parse_student_label(label).is_some()
}
