use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{BoxError, CorrelationBox, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputForm {
    P,
    Matrix,
}

/// A box read from JSON together with the matrix as supplied.
///
/// `{"matrix": ...}` inputs may carry any positive common block sum; they
/// are divided by it to obtain the box and `scale` records the factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxInput {
    pub form: InputForm,
    pub matrix: [[f64; 4]; 4],
    pub scale: f64,
    pub correlation: CorrelationBox,
}

/// Reads `{"p": [[[[..]]]]}` (indices `a, b, x, y`) or `{"matrix": [[..]]}`
/// (rows `2x + a`, columns `2y + b`).
pub fn read_box_json(text: &str) -> Result<BoxInput, BoxError> {
    let value: Value = serde_json::from_str(text).map_err(|e| BoxError::Json(e.to_string()))?;
    let obj = value.as_object().ok_or_else(|| BoxError::Json("expected an object".into()))?;
    match (obj.get("p"), obj.get("matrix")) {
        (Some(_), Some(_)) => Err(BoxError::Json("give either \"p\" or \"matrix\", not both".into())),
        (None, None) => Err(BoxError::Json("missing \"p\" or \"matrix\"".into())),
        (Some(p), None) => {
            let p: Table = serde_json::from_value(p.clone())
                .map_err(|e| BoxError::Json(format!("\"p\" must be a 2x2x2x2 array of numbers: {e}")))?;
            let correlation = CorrelationBox::new(p)?;
            let matrix = super::raw_matrix(&p);
            Ok(BoxInput { form: InputForm::P, matrix, scale: 1.0, correlation })
        }
        (None, Some(m)) => {
            let matrix: [[f64; 4]; 4] = serde_json::from_value(m.clone())
                .map_err(|e| BoxError::Json(format!("\"matrix\" must be a 4x4 array of numbers: {e}")))?;
            let scale = common_block_sum(&matrix)?;
            let correlation = CorrelationBox::from_matrix(&matrix.map(|r| r.map(|v| v / scale)))?;
            Ok(BoxInput { form: InputForm::Matrix, matrix, scale, correlation })
        }
    }
}

/// The shared sum of the four `(x, y)` blocks.
pub(crate) fn common_block_sum(q: &[[f64; 4]; 4]) -> Result<f64, BoxError> {
    if q.iter().flatten().any(|v| !v.is_finite()) {
        return Err(BoxError::NonFinite);
    }
    let block = |x: usize, y: usize| (0..4).map(|k| q[2 * x + k / 2][2 * y + k % 2]).sum::<f64>();
    let s = block(0, 0);
    if s <= 0.0 {
        return Err(BoxError::Normalization { x: 0, y: 0, sum: s });
    }
    for (x, y) in [(0, 1), (1, 0), (1, 1)] {
        let t = block(x, y);
        if (t - s).abs() > super::NORMALIZATION_TOL * s.max(1.0) {
            return Err(BoxError::Normalization { x, y, sum: t / s });
        }
    }
    Ok(s)
}

pub fn write_box_json(b: &CorrelationBox) -> String {
    serde_json::json!({ "p": b.table() }).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_both_forms() {
        let pr = read_box_json(r#"{"matrix": [[1,0,1,0],[0,1,0,1],[1,0,0,1],[0,1,1,0]]}"#).unwrap();
        assert_eq!(pr.form, InputForm::Matrix);
        assert_eq!(pr.scale, 2.0);
        assert_eq!(pr.correlation, CorrelationBox::pr());
        let text = write_box_json(&CorrelationBox::pr());
        let back = read_box_json(&text).unwrap();
        assert_eq!(back.form, InputForm::P);
        assert_eq!(back.correlation, CorrelationBox::pr());
    }

    #[test]
    fn reports_failures() {
        assert!(matches!(read_box_json("{"), Err(BoxError::Json(_))));
        assert!(matches!(read_box_json(r#"{"q": 1}"#), Err(BoxError::Json(_))));
        assert!(matches!(read_box_json(r#"{"matrix": [[1,2],[3,4]]}"#), Err(BoxError::Json(_))));
        let skew = r#"{"matrix": [[1,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,0]]}"#;
        assert!(matches!(read_box_json(skew), Err(BoxError::Normalization { x: 0, y: 1, .. })));
        let negative = r#"{"p": [[[[0.5,0.5],[0.5,0.5]],[[0,0],[0,0]]],[[[0,0],[0,0]],[[0.5,0.5],[0.5,-0.5]]]]}"#;
        assert!(read_box_json(negative).is_err());
    }
}
