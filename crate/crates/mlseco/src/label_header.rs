//! Mulan label-header files: an XML document whose `label` elements carry
//! the names of the label attributes, in document order.

use quick_xml::events::Event;
use quick_xml::Reader;

use crate::error::{Error, Result};

/// Extract label names from a Mulan XML header. Element nesting and
/// namespaces are ignored; any element with local name `label` and a
/// `name` attribute contributes.
pub fn parse_label_header(xml: &str) -> Result<Vec<String>> {
    let mut reader = Reader::from_str(xml);
    let mut names: Vec<String> = Vec::new();
    loop {
        match reader.read_event() {
            Ok(Event::Start(e)) | Ok(Event::Empty(e)) => {
                if e.local_name().as_ref() == b"label" {
                    let mut name: Option<String> = None;
                    for attr in e.attributes() {
                        let attr = attr
                            .map_err(|e| Error::LabelHeader(format!("bad attribute: {e}")))?;
                        if attr.key.local_name().as_ref() == b"name" {
                            let value = attr
                                .unescape_value()
                                .map_err(|e| Error::LabelHeader(format!("bad value: {e}")))?;
                            name = Some(value.into_owned());
                        }
                    }
                    match name {
                        Some(n) => names.push(n),
                        None => {
                            return Err(Error::LabelHeader(
                                "label element without a name attribute".into(),
                            ))
                        }
                    }
                }
            }
            Ok(Event::Eof) => break,
            Ok(_) => {}
            Err(e) => return Err(Error::LabelHeader(format!("XML error: {e}"))),
        }
    }
    if names.is_empty() {
        return Err(Error::LabelHeader("no labels declared".into()));
    }
    let mut seen = std::collections::HashSet::new();
    for n in &names {
        if !seen.insert(n.clone()) {
            return Err(Error::LabelHeader(format!("duplicate label name {n:?}")));
        }
    }
    Ok(names)
}
