//! Tiny stderr logger controlled by the `DIFFDRIVE_LOG` environment
//! variable: `error`, `warn` (default), `info` or `debug`.

use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Level {
    Error = 0,
    Warn = 1,
    Info = 2,
    Debug = 3,
}

fn level() -> Level {
    static LEVEL: OnceLock<Level> = OnceLock::new();
    *LEVEL.get_or_init(|| {
        match std::env::var("DIFFDRIVE_LOG").as_deref() {
            Ok("error") => Level::Error,
            Ok("info") => Level::Info,
            Ok("debug") => Level::Debug,
            _ => Level::Warn,
        }
    })
}

pub fn enabled(wanted: Level) -> bool {
    wanted <= level()
}

pub fn warn(message: impl AsRef<str>) {
    if enabled(Level::Warn) {
        eprintln!("warning: {}", message.as_ref());
    }
}

pub fn info(message: impl AsRef<str>) {
    if enabled(Level::Info) {
        eprintln!("info: {}", message.as_ref());
    }
}

pub fn debug(message: impl AsRef<str>) {
    if enabled(Level::Debug) {
        eprintln!("debug: {}", message.as_ref());
    }
}
