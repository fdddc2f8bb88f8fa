//! Output documents. Text format is for reading; machine format is a
//! versioned line-based document of named sections.

use std::fmt::Write;

pub const MACHINE_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Machine,
}

/// One named section: `key value` fields and an optional verbatim body.
#[derive(Debug, Default)]
pub struct Section {
    name: String,
    fields: Vec<(String, String)>,
    /// Human-readable lines.
    text: Vec<String>,
    /// Verbatim machine body (module text formats).
    body: String,
}

impl Section {
    pub fn new(name: impl Into<String>) -> Self {
        Section {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn field(mut self, key: &str, value: impl ToString) -> Self {
        self.fields.push((key.into(), value.to_string()));
        self
    }

    pub fn text(mut self, line: impl Into<String>) -> Self {
        self.text.push(line.into());
        self
    }

    pub fn body(mut self, body: impl Into<String>) -> Self {
        self.body = body.into();
        self
    }
}

#[derive(Debug)]
pub struct Doc {
    command: String,
    sections: Vec<Section>,
}

impl Doc {
    pub fn new(command: &str) -> Self {
        Doc {
            command: command.into(),
            sections: Vec::new(),
        }
    }

    pub fn push(&mut self, s: Section) {
        self.sections.push(s);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.render_text(),
            Format::Machine => self.render_machine(),
        }
    }

    fn render_text(&self) -> String {
        let mut out = String::new();
        for s in &self.sections {
            writeln!(out, "{}:", s.name).unwrap();
            for (k, v) in &s.fields {
                writeln!(out, "  {k}: {v}").unwrap();
            }
            for l in &s.text {
                for line in l.lines() {
                    writeln!(out, "  {line}").unwrap();
                }
            }
        }
        out
    }

    /// ```text
    /// qindex-machine 1
    /// command <name>
    /// section <name>
    /// field <key> <value>
    /// body <line count>
    /// <body lines>
    /// end
    /// ...
    /// eof
    /// ```
    fn render_machine(&self) -> String {
        let mut out = format!(
            "qindex-machine {MACHINE_VERSION}\ncommand {}\n",
            self.command
        );
        for s in &self.sections {
            writeln!(out, "section {}", s.name).unwrap();
            for (k, v) in &s.fields {
                writeln!(out, "field {k} {v}").unwrap();
            }
            if !s.body.is_empty() {
                let body = s.body.trim_end_matches('\n');
                writeln!(out, "body {}", body.lines().count()).unwrap();
                writeln!(out, "{body}").unwrap();
            }
            out.push_str("end\n");
        }
        out.push_str("eof\n");
        out
    }
}
