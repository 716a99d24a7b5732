//! Card, rank, suit, and deck primitives plus the two-character text
//! notation shared by every engine ("S2" = Spade 2, "SB"/"HR" = jokers,
//! "r-5"/"g-skip" = Uno cards).

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CardError {
    #[error("unknown card notation: {0:?}")]
    UnknownNotation(String),
}

/// The seven supported games.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Game {
    Doudizhu,
    Guandan,
    Uno,
    GinRummy,
    Leduc,
    LimitHoldem,
    NoLimitHoldem,
}

pub const ALL_GAMES: [Game; 7] = [
    Game::Doudizhu,
    Game::Guandan,
    Game::Uno,
    Game::GinRummy,
    Game::Leduc,
    Game::LimitHoldem,
    Game::NoLimitHoldem,
];

impl Game {
    pub fn as_str(&self) -> &'static str {
        match self {
            Game::Doudizhu => "doudizhu",
            Game::Guandan => "guandan",
            Game::Uno => "uno",
            Game::GinRummy => "gin_rummy",
            Game::Leduc => "leduc",
            Game::LimitHoldem => "limit_holdem",
            Game::NoLimitHoldem => "nolimit_holdem",
        }
    }

    pub fn from_str(name: &str) -> Result<Game, String> {
        match name {
            "doudizhu" => Ok(Game::Doudizhu),
            "guandan" => Ok(Game::Guandan),
            "uno" => Ok(Game::Uno),
            "gin_rummy" | "gin-rummy" => Ok(Game::GinRummy),
            "leduc" => Ok(Game::Leduc),
            "limit_holdem" | "limit-holdem" => Ok(Game::LimitHoldem),
            "nolimit_holdem" | "nolimit-holdem" => Ok(Game::NoLimitHoldem),
            "riichi" | "mahjong" | "riichi_mahjong" => Err(format!(
                "unsupported game {name:?}: mahjong has no engine here; its samples \
                 enter the pipeline as an external pool"
            )),
            other => Err(format!("unsupported game {other:?}")),
        }
    }

    pub fn num_seats(&self) -> usize {
        match self {
            Game::Doudizhu => 3,
            Game::Guandan => 4,
            _ => 2,
        }
    }
}

impl fmt::Display for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suit {
    Spade,
    Heart,
    Club,
    Diamond,
}

pub const ALL_SUITS: [Suit; 4] = [Suit::Spade, Suit::Heart, Suit::Club, Suit::Diamond];

impl Suit {
    pub fn ch(&self) -> char {
        match self {
            Suit::Spade => 'S',
            Suit::Heart => 'H',
            Suit::Club => 'C',
            Suit::Diamond => 'D',
        }
    }

    fn from_ch(c: char) -> Option<Suit> {
        match c {
            'S' => Some(Suit::Spade),
            'H' => Some(Suit::Heart),
            'C' => Some(Suit::Club),
            'D' => Some(Suit::Diamond),
            _ => None,
        }
    }
}

/// French-deck rank. The enum order is the natural A,2..K sequence; games
/// impose their own orderings (ace high, ace low, level cards) on top.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rank {
    Ace,
    Two,
    Three,
    Four,
    Five,
    Six,
    Seven,
    Eight,
    Nine,
    Ten,
    Jack,
    Queen,
    King,
}

pub const ALL_RANKS: [Rank; 13] = [
    Rank::Ace,
    Rank::Two,
    Rank::Three,
    Rank::Four,
    Rank::Five,
    Rank::Six,
    Rank::Seven,
    Rank::Eight,
    Rank::Nine,
    Rank::Ten,
    Rank::Jack,
    Rank::Queen,
    Rank::King,
];

impl Rank {
    pub fn ch(&self) -> char {
        match self {
            Rank::Ace => 'A',
            Rank::Two => '2',
            Rank::Three => '3',
            Rank::Four => '4',
            Rank::Five => '5',
            Rank::Six => '6',
            Rank::Seven => '7',
            Rank::Eight => '8',
            Rank::Nine => '9',
            Rank::Ten => 'T',
            Rank::Jack => 'J',
            Rank::Queen => 'Q',
            Rank::King => 'K',
        }
    }

    pub fn from_ch(c: char) -> Option<Rank> {
        match c {
            'A' => Some(Rank::Ace),
            '2' => Some(Rank::Two),
            '3' => Some(Rank::Three),
            '4' => Some(Rank::Four),
            '5' => Some(Rank::Five),
            '6' => Some(Rank::Six),
            '7' => Some(Rank::Seven),
            '8' => Some(Rank::Eight),
            '9' => Some(Rank::Nine),
            'T' => Some(Rank::Ten),
            'J' => Some(Rank::Jack),
            'Q' => Some(Rank::Queen),
            'K' => Some(Rank::King),
            _ => None,
        }
    }

    /// 1 for A, pip value for 2..10, 10 for T/J/Q/K (Gin Rummy deadwood).
    pub fn deadwood_value(&self) -> u32 {
        match self {
            Rank::Ace => 1,
            Rank::Ten | Rank::Jack | Rank::Queen | Rank::King => 10,
            r => r.index() as u32 + 1,
        }
    }

    /// Position in the natural A,2..K sequence, 0-based.
    pub fn index(&self) -> usize {
        *self as usize
    }

    pub fn from_index(i: usize) -> Rank {
        ALL_RANKS[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnoColor {
    Red,
    Yellow,
    Green,
    Blue,
}

pub const ALL_UNO_COLORS: [UnoColor; 4] =
    [UnoColor::Red, UnoColor::Yellow, UnoColor::Green, UnoColor::Blue];

impl UnoColor {
    pub fn ch(&self) -> char {
        match self {
            UnoColor::Red => 'r',
            UnoColor::Yellow => 'y',
            UnoColor::Green => 'g',
            UnoColor::Blue => 'b',
        }
    }

    fn from_ch(c: char) -> Option<UnoColor> {
        match c {
            'r' => Some(UnoColor::Red),
            'y' => Some(UnoColor::Yellow),
            'g' => Some(UnoColor::Green),
            'b' => Some(UnoColor::Blue),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnoFace {
    Digit(u8),
    Skip,
    Reverse,
    DrawTwo,
    Wild,
    WildDrawFour,
}

impl UnoFace {
    pub fn as_str(&self) -> String {
        match self {
            UnoFace::Digit(d) => d.to_string(),
            UnoFace::Skip => "skip".into(),
            UnoFace::Reverse => "reverse".into(),
            UnoFace::DrawTwo => "draw_2".into(),
            UnoFace::Wild => "wild".into(),
            UnoFace::WildDrawFour => "wild_draw_4".into(),
        }
    }

    fn from_str(s: &str) -> Option<UnoFace> {
        match s {
            "skip" => Some(UnoFace::Skip),
            "reverse" => Some(UnoFace::Reverse),
            "draw_2" => Some(UnoFace::DrawTwo),
            "wild" => Some(UnoFace::Wild),
            "wild_draw_4" => Some(UnoFace::WildDrawFour),
            d => d.parse::<u8>().ok().filter(|d| *d <= 9).map(UnoFace::Digit),
        }
    }

    pub fn is_wild(&self) -> bool {
        matches!(self, UnoFace::Wild | UnoFace::WildDrawFour)
    }
}

/// A card from any of the supported decks. French cards and jokers are one
/// family, Uno cards the other; a value is always exactly one of the two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Card {
    Standard { suit: Suit, rank: Rank },
    /// Small joker; notation "SB".
    BlackJoker,
    /// Big joker; notation "HR".
    RedJoker,
    Uno { color: UnoColor, face: UnoFace },
}

impl Card {
    pub fn std(suit: Suit, rank: Rank) -> Card {
        Card::Standard { suit, rank }
    }

    pub fn uno(color: UnoColor, face: UnoFace) -> Card {
        Card::Uno { color, face }
    }

    pub fn rank(&self) -> Option<Rank> {
        match self {
            Card::Standard { rank, .. } => Some(*rank),
            _ => None,
        }
    }

    pub fn suit(&self) -> Option<Suit> {
        match self {
            Card::Standard { suit, .. } => Some(*suit),
            _ => None,
        }
    }

    pub fn is_joker(&self) -> bool {
        matches!(self, Card::BlackJoker | Card::RedJoker)
    }

    /// The numeric encoding used by the DouDizhu action format:
    /// 3..14 for 3..A, 17 for 2, 20 for the black joker, 30 for the red.
    pub fn dou_int(&self) -> i64 {
        match self {
            Card::Standard { rank, .. } => match rank {
                Rank::Two => 17,
                Rank::Ace => 14,
                Rank::Jack => 11,
                Rank::Queen => 12,
                Rank::King => 13,
                r => r.index() as i64 + 1, // 3..10
            },
            Card::BlackJoker => 20,
            Card::RedJoker => 30,
            Card::Uno { .. } => panic!("uno card has no doudizhu encoding"),
        }
    }
}

/// Format a card in the shared text notation: suit char + rank char for
/// French cards, "SB"/"HR" for jokers, "color-face" for Uno.
pub fn format_card(card: Card) -> String {
    match card {
        Card::Standard { suit, rank } => format!("{}{}", suit.ch(), rank.ch()),
        Card::BlackJoker => "SB".into(),
        Card::RedJoker => "HR".into(),
        Card::Uno { color, face } => format!("{}-{}", color.ch(), face.as_str()),
    }
}

/// Inverse of [`format_card`].
pub fn parse_card(text: &str) -> Result<Card, CardError> {
    let err = || CardError::UnknownNotation(text.to_string());
    if let Some((color, face)) = text.split_once('-') {
        let mut chars = color.chars();
        let c = chars.next().ok_or_else(err)?;
        if chars.next().is_some() {
            return Err(err());
        }
        let color = UnoColor::from_ch(c).ok_or_else(err)?;
        let face = UnoFace::from_str(face).ok_or_else(err)?;
        return Ok(Card::Uno { color, face });
    }
    match text {
        "SB" => return Ok(Card::BlackJoker),
        "HR" => return Ok(Card::RedJoker),
        _ => {}
    }
    let chars: Vec<char> = text.chars().collect();
    if chars.len() != 2 {
        return Err(err());
    }
    let suit = Suit::from_ch(chars[0]).ok_or_else(err)?;
    let rank = Rank::from_ch(chars[1]).ok_or_else(err)?;
    Ok(Card::Standard { suit, rank })
}

/// Format a card rank-first ("3S", "TH"), the style Gin Rummy actions use.
pub fn format_card_rank_first(card: Card) -> String {
    match card {
        Card::Standard { suit, rank } => format!("{}{}", rank.ch(), suit.ch()),
        _ => panic!("rank-first notation only covers plain french cards"),
    }
}

pub fn parse_card_rank_first(text: &str) -> Result<Card, CardError> {
    let err = || CardError::UnknownNotation(text.to_string());
    let chars: Vec<char> = text.chars().collect();
    if chars.len() != 2 {
        return Err(err());
    }
    let rank = Rank::from_ch(chars[0]).ok_or_else(err)?;
    let suit = Suit::from_ch(chars[1]).ok_or_else(err)?;
    Ok(Card::Standard { suit, rank })
}

fn french_deck() -> Vec<Card> {
    let mut cards = Vec::with_capacity(52);
    for &suit in &ALL_SUITS {
        for &rank in &ALL_RANKS {
            cards.push(Card::std(suit, rank));
        }
    }
    cards
}

fn uno_deck() -> Vec<Card> {
    let mut cards = Vec::with_capacity(108);
    for &color in &ALL_UNO_COLORS {
        cards.push(Card::uno(color, UnoFace::Digit(0)));
        for d in 1..=9 {
            cards.push(Card::uno(color, UnoFace::Digit(d)));
            cards.push(Card::uno(color, UnoFace::Digit(d)));
        }
        for face in [UnoFace::Skip, UnoFace::DrawTwo, UnoFace::Reverse] {
            cards.push(Card::uno(color, face));
            cards.push(Card::uno(color, face));
        }
        cards.push(Card::uno(color, UnoFace::Wild));
        cards.push(Card::uno(color, UnoFace::WildDrawFour));
    }
    cards
}

/// The full deck a game is played with, as an ordered list (callers shuffle).
pub fn build_deck(game: Game) -> Vec<Card> {
    match game {
        Game::Doudizhu => {
            let mut cards = french_deck();
            cards.push(Card::BlackJoker);
            cards.push(Card::RedJoker);
            cards
        }
        Game::Guandan => {
            let mut cards = Vec::with_capacity(108);
            for _ in 0..2 {
                cards.extend(french_deck());
                cards.push(Card::BlackJoker);
                cards.push(Card::RedJoker);
            }
            cards
        }
        Game::Uno => uno_deck(),
        Game::GinRummy | Game::LimitHoldem | Game::NoLimitHoldem => french_deck(),
        Game::Leduc => vec![
            Card::std(Suit::Spade, Rank::Jack),
            Card::std(Suit::Heart, Rank::Jack),
            Card::std(Suit::Spade, Rank::Queen),
            Card::std(Suit::Heart, Rank::Queen),
            Card::std(Suit::Spade, Rank::King),
            Card::std(Suit::Heart, Rank::King),
        ],
    }
}

/// Multiset equality for card collections, order-insensitive.
pub fn same_multiset(a: &[Card], b: &[Card]) -> bool {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort();
    b.sort();
    a == b
}
