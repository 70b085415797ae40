// Copyright 2026 The depol Authors
// SPDX-License-Identifier: Apache-2.0

//! Minimal CSV writer. Floats are written with 17 significant digits.

/// Formats `x` with 17 significant digits, which round-trips an `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Like [`num`], with `None` as an empty cell.
pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Buffered CSV table with a fixed column count.
pub struct Csv {
    width: usize,
    writer: csv::Writer<Vec<u8>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(header).expect("writing to memory");
        Self {
            width: header.len(),
            writer,
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.width, "row width differs from header");
        self.writer.write_record(&row).expect("writing to memory");
    }

    pub fn render(self) -> String {
        let bytes = self.writer.into_inner().expect("writing to memory");
        String::from_utf8(bytes).expect("CSV cells are UTF-8")
    }
}
