#![allow(dead_code)]

pub mod streams;
