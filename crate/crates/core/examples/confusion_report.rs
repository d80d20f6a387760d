//! Score labelled predictions and print the per-class report, here for a
//! two-species confusion matrix with unidentified fragments.
//!
//! ```bash
//! cargo run -p echomem --example confusion_report
//! ```

use echomem::eval::{report, ConfusionMatrix};

fn main() -> echomem::Result<()> {
    let cm = ConfusionMatrix::from_counts(
        vec!["PIPI".into(), "PIPY".into()],
        vec![vec![1890, 322, 37], vec![513, 1970, 67]],
    )?;
    let mut csv = Vec::new();
    cm.write_csv(&mut csv)?;
    print!("{}\n", String::from_utf8_lossy(&csv));

    let r = report(&cm)?;
    print!("{}", r.render_text());
    let mut out = Vec::new();
    r.write_csv(&mut out)?;
    print!("\n{}", String::from_utf8_lossy(&out));
    Ok(())
}
