"""Instance construction from price series, statistics files and generators."""
