# Core modules for IQCaption360 desk toolkit
